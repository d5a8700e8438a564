//! Feature selection via reduction to constrained clustering.
//!
//! Removing rows of `D` is the same as removing outlier columns of the
//! transpose `A = D^T`, and a k-clustering of the columns of `D` can be read
//! off the centers of a `|Σ|^k`-clustering of the columns of `A` whose center
//! rows are constrained to a fixed pattern table. Costs transfer exactly in
//! both directions.

use crate::constrained::{solve_constrained, ConstrainedInstance, SolveMode};
use crate::error::{Error, Result};
use crate::model::{
    check_partition, hamming, transpose, Alphabet, CategoricalMatrix, ClusteringSolution,
    FeatureSelectionSolution, RelationSet, Symbol, VerifyFailure,
};

/// Remove at most `outlier_cap` rows of `matrix` so that its columns admit a
/// k-clustering of cost at most `budget` on the remaining rows.
#[derive(Debug, Clone)]
pub struct FeatureSelectionInstance {
    pub matrix: CategoricalMatrix,
    pub k: usize,
    pub budget: u64,
    pub outlier_cap: usize,
}

impl FeatureSelectionInstance {
    pub fn new(
        matrix: CategoricalMatrix,
        k: usize,
        budget: u64,
        outlier_cap: usize,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInstance("k must be >= 1".into()));
        }
        if outlier_cap >= matrix.rows() {
            return Err(Error::InvalidInstance(format!(
                "outlier cap {} must be smaller than the row count {}",
                outlier_cap,
                matrix.rows()
            )));
        }
        Ok(FeatureSelectionInstance { matrix, k, budget, outlier_cap })
    }
}

/// The lexicographically ordered table of all `|Σ|^k` length-k strings,
/// together with its k column tuples `z_1..z_k` (each of length `|Σ|^k`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTable {
    strings: Vec<Vec<Symbol>>,
    columns_z: Vec<Vec<Symbol>>,
}

impl PatternTable {
    pub fn new(alphabet: Alphabet, k: usize, work_ceiling: u128) -> Result<Self> {
        let mut count: u128 = 1;
        for _ in 0..k {
            count = count.saturating_mul(alphabet.size() as u128);
        }
        if count > work_ceiling || count > 1 << 20 {
            return Err(Error::WorkCeilingExceeded { estimated: count, ceiling: work_ceiling });
        }
        let mut strings: Vec<Vec<Symbol>> = vec![Vec::new()];
        for _ in 0..k {
            let mut next = Vec::with_capacity(strings.len() * alphabet.size());
            for prefix in &strings {
                for s in alphabet.symbols() {
                    let mut t = prefix.clone();
                    t.push(s);
                    next.push(t);
                }
            }
            strings = next;
        }
        // Prefix extension in symbol order yields lexicographic order.
        debug_assert!(strings.windows(2).all(|w| w[0] < w[1]));
        let columns_z = (0..k)
            .map(|j| strings.iter().map(|s| s[j]).collect())
            .collect();
        Ok(PatternTable { strings, columns_z })
    }

    pub fn strings(&self) -> &[Vec<Symbol>] {
        &self.strings
    }

    /// The tuples `z_1..z_k`; the relation every reduced row carries.
    pub fn columns_z(&self) -> &[Vec<Symbol>] {
        &self.columns_z
    }

    /// Index of the string table, i.e. the number of clusters of the reduced
    /// instance.
    pub fn cluster_count(&self) -> usize {
        self.strings.len()
    }
}

/// Builds the equivalent constrained-clustering instance: the transposed
/// matrix, `|Σ|^k` clusters, and the identical relation `{z_1..z_k}` on every
/// row.
pub fn build_reduction(
    instance: &FeatureSelectionInstance,
    work_ceiling: u128,
) -> Result<(ConstrainedInstance, PatternTable)> {
    let table = PatternTable::new(instance.matrix.alphabet(), instance.k, work_ceiling)?;
    let reduced_matrix = transpose(&instance.matrix);
    let relation: Vec<Vec<Symbol>> = table.columns_z().to_vec();
    let relations = RelationSet::new(
        table.cluster_count(),
        vec![relation; reduced_matrix.rows()],
    )?;
    let reduced = ConstrainedInstance::new(
        reduced_matrix,
        table.cluster_count(),
        instance.budget,
        instance.outlier_cap,
        relations,
    )?;
    Ok((reduced, table))
}

/// Maps a verified solution of the reduced instance back to a
/// feature-selection solution of the original one. The mapped-back cost
/// equals the reduced cost exactly.
pub fn map_back(
    instance: &FeatureSelectionInstance,
    table: &PatternTable,
    solution: &ClusteringSolution,
) -> Result<FeatureSelectionSolution> {
    let d = &instance.matrix;
    let (m, n) = (d.rows(), d.cols());
    let k = instance.k;

    let removed_features = solution.outliers.clone();
    let kept_rows: Vec<usize> =
        (0..m).filter(|r| removed_features.binary_search(r).is_err()).collect();

    // Data point j lands in the cluster whose tuple its center row matches.
    let mut point_clusters: Vec<Vec<usize>> = vec![Vec::new(); k];
    for j in 0..n {
        let row_tuple: Vec<Symbol> = solution.centers.iter().map(|c| c[j]).collect();
        let t = table
            .columns_z()
            .iter()
            .position(|z| *z == row_tuple)
            .ok_or_else(|| {
                Error::InvalidSolution(format!(
                    "center row {} matches no pattern column",
                    j + 1
                ))
            })?;
        point_clusters[t].push(j);
    }

    // The center of data cluster t reads, at kept feature f lying in feature
    // cluster p, the symbol strings[p][t].
    let mut feature_cluster = vec![usize::MAX; m];
    for (p, members) in solution.clusters.iter().enumerate() {
        for &f in members {
            feature_cluster[f] = p;
        }
    }
    let mut centers: Vec<Vec<Symbol>> = Vec::with_capacity(k);
    for t in 0..k {
        let center: Vec<Symbol> = kept_rows
            .iter()
            .map(|&f| table.strings()[feature_cluster[f]][t])
            .collect();
        centers.push(center);
    }

    let mut cost = 0u64;
    for (t, members) in point_clusters.iter().enumerate() {
        for &j in members {
            let col: Vec<Symbol> = kept_rows.iter().map(|&f| d.get(f, j)).collect();
            cost += hamming(&col, &centers[t]) as u64;
        }
    }
    debug_assert_eq!(cost, solution.cost, "mapped-back cost must match the reduced cost");

    Ok(FeatureSelectionSolution { removed_features, point_clusters, centers, cost })
}

/// Full pipeline: reduce, solve, map back. `None` means no solution of cost
/// at most `budget` exists.
pub fn solve_feature_selection(
    instance: &FeatureSelectionInstance,
    mode: SolveMode,
    work_ceiling: u128,
) -> Result<Option<FeatureSelectionSolution>> {
    let (reduced, table) = build_reduction(instance, work_ceiling)?;
    match solve_constrained(&reduced, mode, work_ceiling)? {
        None => Ok(None),
        Some(outcome) => Ok(Some(map_back(instance, &table, &outcome.solution)?)),
    }
}

/// The feature-selection decision predicate, checked field by field.
pub fn verify_feature_selection(
    instance: &FeatureSelectionInstance,
    solution: &FeatureSelectionSolution,
) -> std::result::Result<(), VerifyFailure> {
    let d = &instance.matrix;
    let (m, n) = (d.rows(), d.cols());
    if solution.removed_features.len() > instance.outlier_cap {
        return Err(VerifyFailure::TooManyOutliers {
            got: solution.removed_features.len(),
            cap: instance.outlier_cap,
        });
    }
    let mut seen = vec![false; m];
    for &r in &solution.removed_features {
        if r >= m {
            return Err(VerifyFailure::Malformed(format!("removed row {} out of range", r + 1)));
        }
        if seen[r] {
            return Err(VerifyFailure::Malformed(format!("row {} removed twice", r + 1)));
        }
        seen[r] = true;
    }
    if solution.point_clusters.len() > instance.k {
        return Err(VerifyFailure::WrongCenterCount {
            got: solution.point_clusters.len(),
            expected: instance.k,
        });
    }
    check_partition(n, &[], &solution.point_clusters)?;
    let kept = m - solution.removed_features.len();
    for center in &solution.centers {
        if center.len() != kept {
            return Err(VerifyFailure::CenterLength { got: center.len(), expected: kept });
        }
    }
    if solution.centers.len() != solution.point_clusters.len() {
        return Err(VerifyFailure::WrongCenterCount {
            got: solution.centers.len(),
            expected: solution.point_clusters.len(),
        });
    }
    let kept_rows: Vec<usize> =
        (0..m).filter(|r| !seen[*r]).collect();
    let mut cost = 0u64;
    for (t, members) in solution.point_clusters.iter().enumerate() {
        for &j in members {
            let col: Vec<Symbol> = kept_rows.iter().map(|&f| d.get(f, j)).collect();
            cost += hamming(&col, &solution.centers[t]) as u64;
        }
    }
    if cost != solution.cost {
        return Err(VerifyFailure::CostMismatch { stored: solution.cost, actual: cost });
    }
    if cost > instance.budget {
        return Err(VerifyFailure::CostExceedsBudget { cost, budget: instance.budget });
    }
    Ok(())
}
