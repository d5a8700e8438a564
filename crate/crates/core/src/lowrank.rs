//! Robust low-rank matrix approximation over GF(p) and over the Boolean
//! semiring, by reduction to constrained clustering.
//!
//! A rank-r approximation assigns every column a combination vector over r
//! generators; columns with equal combination vectors form a cluster whose
//! center is that combination of the generators. Indexing the clusters by all
//! p^r (resp. 2^r) combination vectors and constraining each center row to
//! read off a consistent generator row makes the clustering solver search
//! exactly over rank-at-most-r approximations with up to `l` column outliers.

use crate::constrained::{solve_constrained, ConstrainedInstance, SolveMode};
use crate::error::{Error, Result};
use crate::model::{Alphabet, CategoricalMatrix, ClusteringSolution, RelationSet, Symbol};

/// Which algebra the approximation lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowRankSemantics {
    /// Entries in GF(p), rank over GF(p). The alphabet size is p.
    FiniteField,
    /// Binary entries, Boolean rank (AND as product, OR as sum).
    Boolean,
}

#[derive(Debug, Clone)]
pub struct LowRankInstance {
    pub matrix: CategoricalMatrix,
    pub rank: usize,
    pub budget: u64,
    pub outlier_cap: usize,
    pub semantics: LowRankSemantics,
}

const SUPPORTED_PRIMES: [usize; 4] = [2, 3, 5, 7];

impl LowRankInstance {
    pub fn new(
        matrix: CategoricalMatrix,
        rank: usize,
        budget: u64,
        outlier_cap: usize,
        semantics: LowRankSemantics,
    ) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidInstance("rank must be >= 1".into()));
        }
        let p = matrix.alphabet().size();
        match semantics {
            LowRankSemantics::Boolean if p != 2 => {
                return Err(Error::InvalidInstance(
                    "Boolean semantics requires a binary alphabet".into(),
                ));
            }
            LowRankSemantics::FiniteField if !SUPPORTED_PRIMES.contains(&p) => {
                return Err(Error::InvalidInstance(format!(
                    "field order must be one of {SUPPORTED_PRIMES:?}, got {p}"
                )));
            }
            _ => {}
        }
        if outlier_cap >= matrix.cols() {
            return Err(Error::InvalidInstance(format!(
                "outlier cap {} must be smaller than the column count {}",
                outlier_cap,
                matrix.cols()
            )));
        }
        Ok(LowRankInstance { matrix, rank, budget, outlier_cap, semantics })
    }
}

/// All combination vectors, one per cluster, in the fixed cluster order:
/// lexicographic vectors over GF(p), or subset indicator vectors by
/// increasing bitmask for the Boolean case.
pub fn combination_vectors(instance: &LowRankInstance) -> Vec<Vec<Symbol>> {
    let r = instance.rank;
    match instance.semantics {
        LowRankSemantics::FiniteField => {
            let p = instance.matrix.alphabet().size();
            let mut out: Vec<Vec<Symbol>> = vec![Vec::new()];
            for _ in 0..r {
                let mut next = Vec::with_capacity(out.len() * p);
                for prefix in &out {
                    for s in 0..p {
                        let mut v = prefix.clone();
                        v.push(s as Symbol);
                        next.push(v);
                    }
                }
                out = next;
            }
            out
        }
        LowRankSemantics::Boolean => (0..1usize << r)
            .map(|mask| (0..r).map(|i| (mask >> i & 1) as Symbol).collect())
            .collect(),
    }
}

/// Applies a combination vector to a generator row.
fn combine(combo: &[Symbol], u: &[Symbol], semantics: LowRankSemantics, p: usize) -> Symbol {
    match semantics {
        LowRankSemantics::FiniteField => {
            let sum: usize = combo
                .iter()
                .zip(u)
                .map(|(&c, &g)| c as usize * g as usize)
                .sum();
            (sum % p) as Symbol
        }
        LowRankSemantics::Boolean => combo
            .iter()
            .zip(u)
            .map(|(&c, &g)| c & g)
            .fold(0, |acc, b| acc | b),
    }
}

/// Builds the equivalent constrained-clustering instance: p^r (resp. 2^r)
/// clusters and, on every row, the relation of all tuples readable from a
/// single generator row.
pub fn build_lowrank_relations(
    instance: &LowRankInstance,
    work_ceiling: u128,
) -> Result<ConstrainedInstance> {
    let p = instance.matrix.alphabet().size();
    let combos = combination_vectors(instance);
    let k = combos.len();
    if k as u128 > work_ceiling || k > 1 << 16 {
        return Err(Error::WorkCeilingExceeded { estimated: k as u128, ceiling: work_ceiling });
    }
    let generator_rows = generator_row_space(instance);
    let relation: Vec<Vec<Symbol>> = generator_rows
        .iter()
        .map(|u| combos.iter().map(|c| combine(c, u, instance.semantics, p)).collect())
        .collect();
    let relations =
        RelationSet::new(k, vec![relation; instance.matrix.rows()])?;
    ConstrainedInstance::new(
        instance.matrix.clone(),
        k,
        instance.budget,
        instance.outlier_cap,
        relations,
    )
}

/// Every possible generator row `u`.
fn generator_row_space(instance: &LowRankInstance) -> Vec<Vec<Symbol>> {
    let base = match instance.semantics {
        LowRankSemantics::FiniteField => instance.matrix.alphabet().size(),
        LowRankSemantics::Boolean => 2,
    };
    let mut out: Vec<Vec<Symbol>> = vec![Vec::new()];
    for _ in 0..instance.rank {
        let mut next = Vec::with_capacity(out.len() * base);
        for prefix in &out {
            for s in 0..base {
                let mut v = prefix.clone();
                v.push(s as Symbol);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// The reconstructed factorization: the rank-bounded approximation, the
/// outlier matrix, and the explicit generator witnesses (`left` is m x r by
/// rows, `right` is the combination vector of each column; zero for
/// outliers).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowRankFactors {
    pub approx: CategoricalMatrix,
    pub outlier: CategoricalMatrix,
    pub left: Vec<Vec<Symbol>>,
    pub right: Vec<Vec<Symbol>>,
}

/// Turns a verified solution of the reduced instance into matrices `B`
/// (the approximation) and `C` (outlier columns), together with generator
/// witnesses certifying the rank bound. `||A - B - C||_0` equals the
/// solution cost.
pub fn reconstruct_factors(
    instance: &LowRankInstance,
    solution: &ClusteringSolution,
) -> Result<LowRankFactors> {
    let a = &instance.matrix;
    let (m, n) = (a.rows(), a.cols());
    let p = a.alphabet().size();
    let combos = combination_vectors(instance);
    let generator_rows = generator_row_space(instance);

    // Recover the generator row of every matrix row from the center tuple.
    let mut left: Vec<Vec<Symbol>> = Vec::with_capacity(m);
    for h in 0..m {
        let row_tuple: Vec<Symbol> = solution.centers.iter().map(|c| c[h]).collect();
        let u = generator_rows
            .iter()
            .find(|u| {
                combos
                    .iter()
                    .zip(&row_tuple)
                    .all(|(c, &t)| combine(c, u, instance.semantics, p) == t)
            })
            .ok_or_else(|| {
                Error::InvalidSolution(format!(
                    "center row {} is not generated by any generator row",
                    h + 1
                ))
            })?;
        left.push(u.clone());
    }

    let mut cluster_of = vec![None; n];
    for (t, members) in solution.clusters.iter().enumerate() {
        for &j in members {
            cluster_of[j] = Some(t);
        }
    }
    let zero = vec![0 as Symbol; m];
    let mut approx_cols: Vec<Vec<Symbol>> = Vec::with_capacity(n);
    let mut outlier_cols: Vec<Vec<Symbol>> = Vec::with_capacity(n);
    let mut right: Vec<Vec<Symbol>> = Vec::with_capacity(n);
    for j in 0..n {
        match cluster_of[j] {
            Some(t) => {
                approx_cols.push(solution.centers[t].clone());
                outlier_cols.push(zero.clone());
                right.push(combos[t].clone());
            }
            None => {
                approx_cols.push(zero.clone());
                outlier_cols.push(a.column(j));
                right.push(vec![0; instance.rank]);
            }
        }
    }
    let approx = CategoricalMatrix::from_columns(a.alphabet(), &approx_cols)?;
    let outlier = CategoricalMatrix::from_columns(a.alphabet(), &outlier_cols)?;
    debug_assert!((0..m).all(|i| {
        (0..n).all(|j| {
            combine(&right[j], &left[i], instance.semantics, p) == approx.get(i, j)
        })
    }));
    Ok(LowRankFactors { approx, outlier, left, right })
}

/// `||A - B - C||_0`: field subtraction for GF(p), symmetric difference for
/// the Boolean case.
pub fn l0_deviation(
    instance: &LowRankInstance,
    approx: &CategoricalMatrix,
    outlier: &CategoricalMatrix,
) -> u64 {
    let a = &instance.matrix;
    let p = a.alphabet().size();
    let mut count = 0u64;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let (av, bv, cv) = (a.get(i, j) as usize, approx.get(i, j) as usize, outlier.get(i, j) as usize);
            let differs = match instance.semantics {
                LowRankSemantics::FiniteField => (av + 2 * p - bv - cv) % p != 0,
                LowRankSemantics::Boolean => av ^ bv ^ cv != 0,
            };
            if differs {
                count += 1;
            }
        }
    }
    count
}

/// Full pipeline: reduce, solve, reconstruct.
pub fn solve_lowrank(
    instance: &LowRankInstance,
    mode: SolveMode,
    work_ceiling: u128,
) -> Result<Option<(ClusteringSolution, LowRankFactors)>> {
    let reduced = build_lowrank_relations(instance, work_ceiling)?;
    match solve_constrained(&reduced, mode, work_ceiling)? {
        None => Ok(None),
        Some(outcome) => {
            let factors = reconstruct_factors(instance, &outcome.solution)?;
            Ok(Some((outcome.solution, factors)))
        }
    }
}
