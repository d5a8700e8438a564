//! Exact combinatorial solvers for clustering categorical data.
//!
//! The crate is organized around one target problem, constrained clustering
//! with outliers: remove at most `l` columns of a categorical matrix and
//! partition the rest into at most `k` clusters whose centers jointly satisfy
//! per-row relations, at total Hamming cost at most `B`. Several classic
//! problems reduce to it and are solved through the same machinery:
//!
//! * [`feature_selection`] — remove at most `l` rows so the columns admit a
//!   cheap `k`-clustering on the remaining rows.
//! * [`column_outliers`] — plain `k`-clustering that may discard up to `l`
//!   columns, solved by a dedicated weighted algorithm.
//! * [`lowrank`] — robust low-rank matrix approximation over GF(p) and over
//!   the Boolean semiring, via relation constructions.
//!
//! All solvers are exact and deterministic (the column-outlier solver also
//! has a randomized color-coding mode). [`lab`] provides instance generators
//! and exhaustive reference oracles used to certify optimality at small
//! scales.

pub mod column_outliers;
pub mod constrained;
mod error;
pub mod feature_selection;
pub mod hypergraph;
pub mod lab;
pub mod lowrank;
pub mod model;

pub use error::{Error, Result};
pub use model::{
    hamming, solution_cost, transpose, verify_constrained, Alphabet, CategoricalMatrix,
    ClusteringSolution, FeatureSelectionSolution, RelationSet, Symbol, VerifyFailure,
};

/// Default ceiling on estimated search-space size before a solver refuses to
/// run; override per call or through the CLI.
pub const DEFAULT_WORK_CEILING: u128 = 100_000_000;
