//! Exact solver for constrained clustering with outliers.
//!
//! The search enumerates k-tuples of input columns, repairs each tuple so
//! every row lies in its relation, guesses the set of rows where the tuple
//! deviates from an optimal center tuple, rewrites those rows with relation
//! elements, and scores each candidate center tuple with a greedy assignment.
//! The deviation sets come either from brute force over all small row subsets
//! (`Direct`) or from occurrences of quarter-cover patterns in the difference
//! hypergraph of the tuple (`Hypergraph`). Both modes are exact; they may
//! return different optimal solutions but always the same optimal cost.

use crate::error::{Error, Result};
use crate::hypergraph::{
    build_difference_hypergraph, edge_budget_cap, enumerate_patterns_exact, find_occurrences,
    DiffTuple,
};
use crate::model::{
    hamming, CategoricalMatrix, ClusteringSolution, RelationSet, Symbol,
};
use crate::DEFAULT_WORK_CEILING;
use rayon::prelude::*;
use std::collections::BTreeSet;

/// A full instance of constrained clustering with outliers.
#[derive(Debug, Clone)]
pub struct ConstrainedInstance {
    pub matrix: CategoricalMatrix,
    pub k: usize,
    pub budget: u64,
    pub outlier_cap: usize,
    pub relations: RelationSet,
}

impl ConstrainedInstance {
    pub fn new(
        matrix: CategoricalMatrix,
        k: usize,
        budget: u64,
        outlier_cap: usize,
        relations: RelationSet,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInstance("k must be >= 1".into()));
        }
        if relations.arity() != k {
            return Err(Error::ArityMismatch { expected: k, got: relations.arity() });
        }
        if relations.len() != matrix.rows() {
            return Err(Error::InvalidInstance(format!(
                "{} relations for {} rows",
                relations.len(),
                matrix.rows()
            )));
        }
        if outlier_cap >= matrix.cols() {
            return Err(Error::InvalidInstance(format!(
                "outlier cap {} must be smaller than the column count {}",
                outlier_cap,
                matrix.cols()
            )));
        }
        Ok(ConstrainedInstance { matrix, k, budget, outlier_cap, relations })
    }
}

/// How the solver generates candidate deviation sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// All row subsets of size at most `B`.
    Direct,
    /// Occurrences of enumerated patterns in the difference hypergraph.
    Hypergraph,
}

/// A refined k-tuple: every row tuple lies in its relation, and `deviated`
/// records the rows the refinement rewrote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateTuple {
    pub columns: Vec<Vec<Symbol>>,
    pub deviated: Vec<usize>,
}

/// Rewrites each row where the tuple violates its relation with the
/// canonically smallest relation element. Returns `None` when more than
/// `budget` rows would need rewriting.
pub fn refine_tuple(
    columns: &[Vec<Symbol>],
    relations: &RelationSet,
    budget: u64,
) -> Option<CandidateTuple> {
    let k = columns.len();
    let m = columns.first().map_or(0, |c| c.len());
    let mut tuple = vec![0 as Symbol; k];
    let mut deviated = Vec::new();
    for h in 0..m {
        for (t, col) in tuple.iter_mut().zip(columns) {
            *t = col[h];
        }
        if !relations.contains(h, &tuple) {
            deviated.push(h);
            if deviated.len() as u64 > budget {
                return None;
            }
        }
    }
    let mut refined = columns.to_vec();
    for &h in &deviated {
        let replacement = &relations.row(h)[0];
        for (col, &s) in refined.iter_mut().zip(replacement) {
            col[h] = s;
        }
    }
    Some(CandidateTuple { columns: refined, deviated })
}

/// Minimum-cost assignment for fixed centers: every column gets its nearest
/// center (ties to the smallest center index) and the `outlier_cap` columns
/// with the largest best-distance become outliers (ties to the larger column
/// index). The result is optimal over all assignments with at most
/// `outlier_cap` outliers for these centers.
pub fn greedy_assign(
    matrix: &CategoricalMatrix,
    centers: &[Vec<Symbol>],
    outlier_cap: usize,
) -> ClusteringSolution {
    let n = matrix.cols();
    let mut nearest: Vec<(usize, usize)> = Vec::with_capacity(n);
    for j in 0..n {
        let col = matrix.column(j);
        let mut best = (usize::MAX, 0usize);
        for (t, center) in centers.iter().enumerate() {
            let d = hamming(&col, center);
            if d < best.0 {
                best = (d, t);
            }
        }
        nearest.push(best);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| nearest[b].0.cmp(&nearest[a].0).then(b.cmp(&a)));
    let drop = outlier_cap.min(n);
    let mut outliers: Vec<usize> = order[..drop].to_vec();
    outliers.sort_unstable();
    let mut clusters = vec![Vec::new(); centers.len()];
    let mut cost = 0u64;
    for j in 0..n {
        if outliers.binary_search(&j).is_ok() {
            continue;
        }
        let (d, t) = nearest[j];
        clusters[t].push(j);
        cost += d as u64;
    }
    ClusteringSolution { outliers, clusters, centers: centers.to_vec(), cost }
}

/// The tuple a winning solution was derived from; used by the structural
/// spot checks in the test suites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveWitness {
    /// Original column indices of the chosen k-tuple.
    pub tuple_columns: Vec<usize>,
    /// The tuple after refinement.
    pub refined: Vec<Vec<Symbol>>,
}

#[derive(Debug, Clone)]
pub struct ConstrainedOutcome {
    pub solution: ClusteringSolution,
    pub witness: SolveWitness,
}

/// Estimated search-space size `n^k * C(m, B) * maxR^B`, saturating.
fn work_estimate(n: usize, m: usize, k: usize, budget: u64, max_rel: usize) -> u128 {
    let b = (budget as usize).min(m);
    let mut est: u128 = 1;
    for _ in 0..k {
        est = est.saturating_mul(n as u128);
    }
    est = est.saturating_mul(binomial(m, b));
    for _ in 0..b {
        est = est.saturating_mul(max_rel.max(1) as u128);
    }
    est
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut out: u128 = 1;
    for i in 0..k.min(n - k) {
        out = out.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    out
}

/// Solves the instance exactly: the cheapest solution of cost at most `B`,
/// or `None` when no such solution exists. Ties are broken towards the
/// lexicographically smallest center tuple.
pub fn solve_constrained(
    instance: &ConstrainedInstance,
    mode: SolveMode,
    work_ceiling: u128,
) -> Result<Option<ConstrainedOutcome>> {
    let matrix = &instance.matrix;
    let (m, n, k) = (matrix.rows(), matrix.cols(), instance.k);
    let estimated = work_estimate(n, m, k, instance.budget, instance.relations.max_relation_size());
    if estimated > work_ceiling {
        return Err(Error::WorkCeilingExceeded { estimated, ceiling: work_ceiling });
    }

    // Identical columns generate identical tuples; enumerate over distinct
    // columns only (first-occurrence order) and remember a representative.
    let mut distinct: Vec<Vec<Symbol>> = Vec::new();
    let mut representative: Vec<usize> = Vec::new();
    for j in 0..n {
        let col = matrix.column(j);
        if !distinct.contains(&col) {
            distinct.push(col);
            representative.push(j);
        }
    }
    let d = distinct.len();
    let total: u128 = (0..k).try_fold(1u128, |acc, _| acc.checked_mul(d as u128)).unwrap_or(0);
    if total == 0 || total > u64::MAX as u128 {
        return Err(Error::WorkCeilingExceeded { estimated, ceiling: work_ceiling });
    }

    let budget_rows = (instance.budget as usize).min(m);
    let patterns: Vec<_> = match mode {
        SolveMode::Direct => Vec::new(),
        SolveMode::Hypergraph => {
            let mut pats = Vec::new();
            for e in 1..=edge_budget_cap(budget_rows) {
                for v in 1..=budget_rows {
                    pats.extend(enumerate_patterns_exact(v, e).into_iter().map(|p| (e, p)));
                }
            }
            pats
        }
    };

    struct Best {
        cost: u64,
        centers_flat: Vec<Symbol>,
        tuple_id: u64,
        solution: ClusteringSolution,
        refined: Vec<Vec<Symbol>>,
    }
    fn better(a: &Best, b: &Best) -> bool {
        (a.cost, &a.centers_flat, a.tuple_id) < (b.cost, &b.centers_flat, b.tuple_id)
    }

    let eval_tuple = |tuple_id: u64| -> Option<Best> {
        let mut digits = vec![0usize; k];
        let mut rest = tuple_id;
        for digit in digits.iter_mut().rev() {
            *digit = (rest % d as u64) as usize;
            rest /= d as u64;
        }
        let columns: Vec<Vec<Symbol>> = digits.iter().map(|&i| distinct[i].clone()).collect();
        let refined = refine_tuple(&columns, &instance.relations, instance.budget)?;

        // Candidate deviation sets, deduplicated.
        let mut deviation_sets: BTreeSet<Vec<usize>> = BTreeSet::new();
        deviation_sets.insert(Vec::new());
        match mode {
            SolveMode::Direct => {
                let mut subset = Vec::new();
                all_subsets(m, budget_rows, 0, &mut subset, &mut |s| {
                    deviation_sets.insert(s.to_vec());
                });
            }
            SolveMode::Hypergraph => {
                if budget_rows > 0 {
                    let cap = 2 * budget_rows;
                    let host = build_difference_hypergraph(
                        &refined.columns,
                        (0..total as u64).map(|yid| {
                            let mut yd = vec![0usize; k];
                            let mut rest = yid;
                            for digit in yd.iter_mut().rev() {
                                *digit = (rest % d as u64) as usize;
                                rest /= d as u64;
                            }
                            DiffTuple {
                                columns: yd.iter().map(|&i| distinct[i].as_slice()).collect(),
                                weight: 1,
                                payload: yid as usize,
                            }
                        }),
                        cap,
                    );
                    for (_, pattern) in &patterns {
                        if pattern.vertex_count() > host.vertices().len() {
                            continue;
                        }
                        for occurrence in find_occurrences(pattern, &host) {
                            deviation_sets.insert(occurrence);
                        }
                    }
                }
            }
        }

        // Rewrite the tuple at each deviation set with every combination of
        // relation elements; dedupe the resulting center tuples.
        let mut candidates: BTreeSet<Vec<Symbol>> = BTreeSet::new();
        for dev in &deviation_sets {
            let choices: Vec<&[Vec<Symbol>]> =
                dev.iter().map(|&h| instance.relations.row(h)).collect();
            let mut pick = vec![0usize; dev.len()];
            loop {
                let mut flat: Vec<Symbol> = Vec::with_capacity(k * m);
                for col in &refined.columns {
                    flat.extend_from_slice(col);
                }
                for (slot, &h) in dev.iter().enumerate() {
                    let replacement = &choices[slot][pick[slot]];
                    for (j, &s) in replacement.iter().enumerate() {
                        flat[j * m + h] = s;
                    }
                }
                candidates.insert(flat);
                // Odometer over the relation choices.
                let mut slot = 0;
                loop {
                    if slot == dev.len() {
                        break;
                    }
                    pick[slot] += 1;
                    if pick[slot] < choices[slot].len() {
                        break;
                    }
                    pick[slot] = 0;
                    slot += 1;
                }
                if slot == dev.len() {
                    break;
                }
            }
        }

        let mut best: Option<Best> = None;
        for flat in candidates {
            let centers: Vec<Vec<Symbol>> =
                (0..k).map(|j| flat[j * m..(j + 1) * m].to_vec()).collect();
            debug_assert!((0..m).all(|h| {
                let tuple: Vec<Symbol> = centers.iter().map(|c| c[h]).collect();
                instance.relations.contains(h, &tuple)
            }));
            let solution = greedy_assign(matrix, &centers, instance.outlier_cap);
            if solution.cost > instance.budget {
                continue;
            }
            let cand = Best {
                cost: solution.cost,
                centers_flat: flat,
                tuple_id,
                solution,
                refined: refined.columns.clone(),
            };
            if best.as_ref().is_none_or(|b| better(&cand, b)) {
                best = Some(cand);
            }
        }
        best
    };

    let best = (0..total as u64)
        .into_par_iter()
        .filter_map(eval_tuple)
        .reduce_with(|a, b| if better(&a, &b) { a } else { b });

    Ok(best.map(|b| {
        let mut digits = vec![0usize; k];
        let mut rest = b.tuple_id;
        for digit in digits.iter_mut().rev() {
            *digit = (rest % d as u64) as usize;
            rest /= d as u64;
        }
        ConstrainedOutcome {
            solution: b.solution,
            witness: SolveWitness {
                tuple_columns: digits.iter().map(|&i| representative[i]).collect(),
                refined: b.refined,
            },
        }
    }))
}

/// Convenience wrapper with the default work ceiling.
pub fn solve_constrained_default(
    instance: &ConstrainedInstance,
    mode: SolveMode,
) -> Result<Option<ConstrainedOutcome>> {
    solve_constrained(instance, mode, DEFAULT_WORK_CEILING)
}

/// Visits every subset of `{0..m-1}` of size 1..=cap.
pub(crate) fn all_subsets(
    m: usize,
    cap: usize,
    start: usize,
    subset: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if !subset.is_empty() {
        visit(subset);
    }
    if subset.len() == cap {
        return;
    }
    for i in start..m {
        subset.push(i);
        all_subsets(m, cap, i + 1, subset, visit);
        subset.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{verify_constrained, Alphabet};

    fn toy_matrix() -> CategoricalMatrix {
        CategoricalMatrix::from_columns(
            Alphabet::new(2).unwrap(),
            &[
                vec![0, 0, 0, 0],
                vec![0, 0, 0, 1],
                vec![1, 1, 0, 0],
                vec![1, 1, 0, 1],
                vec![1, 0, 1, 0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn refine_leaves_satisfying_tuple_alone() {
        let rels = RelationSet::full(Alphabet::new(2).unwrap(), 2, 3).unwrap();
        let cols = vec![vec![0, 1, 0], vec![1, 0, 1]];
        let refined = refine_tuple(&cols, &rels, 0).unwrap();
        assert_eq!(refined.columns, cols);
        assert!(refined.deviated.is_empty());
    }

    #[test]
    fn refine_rewrites_violating_rows() {
        let rels = RelationSet::new(2, vec![vec![vec![0, 0]]; 3]).unwrap();
        let cols = vec![vec![0, 0, 1], vec![0, 0, 0]];
        let refined = refine_tuple(&cols, &rels, 3).unwrap();
        assert_eq!(refined.columns, vec![vec![0, 0, 0], vec![0, 0, 0]]);
        assert_eq!(refined.deviated, vec![2]);
    }

    #[test]
    fn refine_rejects_over_budget() {
        let rels = RelationSet::new(2, vec![vec![vec![0, 0]]; 3]).unwrap();
        let cols = vec![vec![1, 1, 0], vec![0, 1, 0]];
        // Rows 0 and 1 violate; budget 1 rejects.
        assert!(refine_tuple(&cols, &rels, 1).is_none());
    }

    #[test]
    fn greedy_assign_no_outliers() {
        let m = toy_matrix();
        let centers = vec![vec![0, 0, 0, 0], vec![1, 1, 0, 0]];
        let sol = greedy_assign(&m, &centers, 0);
        assert_eq!(sol.cost, 4); // best distances 0,1,0,1,2
        assert!(sol.outliers.is_empty());
    }

    #[test]
    fn greedy_assign_drops_farthest() {
        let m = toy_matrix();
        let centers = vec![vec![0, 0, 0, 0], vec![1, 1, 0, 0]];
        let sol = greedy_assign(&m, &centers, 1);
        assert_eq!(sol.outliers, vec![4]);
        assert_eq!(sol.cost, 2);
        assert_eq!(sol.clusters, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn greedy_assign_exact_match_is_free() {
        let m = CategoricalMatrix::from_columns(
            Alphabet::new(2).unwrap(),
            &[vec![1, 0], vec![1, 0], vec![1, 0]],
        )
        .unwrap();
        let sol = greedy_assign(&m, &[vec![1, 0]], 1);
        assert_eq!(sol.cost, 0);
    }

    #[test]
    fn solve_trivial_identical_columns() {
        let alphabet = Alphabet::new(2).unwrap();
        let m = CategoricalMatrix::from_columns(alphabet, &[vec![1, 1], vec![1, 1]]).unwrap();
        let rels = RelationSet::full(alphabet, 1, 2).unwrap();
        let inst = ConstrainedInstance::new(m, 1, 0, 0, rels).unwrap();
        for mode in [SolveMode::Direct, SolveMode::Hypergraph] {
            let out = solve_constrained_default(&inst, mode).unwrap().unwrap();
            assert_eq!(out.solution.cost, 0);
            assert_eq!(
                verify_constrained(
                    &inst.matrix,
                    &inst.relations,
                    inst.budget,
                    inst.outlier_cap,
                    &out.solution
                ),
                Ok(())
            );
        }
    }

    #[test]
    fn solve_respects_relations() {
        // Centers forced to read (0,1) in every row: cluster 1 must be all
        // zeros, cluster 2 all ones.
        let alphabet = Alphabet::new(2).unwrap();
        let m = CategoricalMatrix::from_columns(
            alphabet,
            &[vec![0, 0, 0], vec![0, 0, 1], vec![1, 1, 1]],
        )
        .unwrap();
        let rels = RelationSet::new(2, vec![vec![vec![0, 1]]; 3]).unwrap();
        let inst = ConstrainedInstance::new(m, 2, 1, 0, rels).unwrap();
        for mode in [SolveMode::Direct, SolveMode::Hypergraph] {
            let out = solve_constrained_default(&inst, mode).unwrap().unwrap();
            assert_eq!(out.solution.cost, 1);
            assert_eq!(out.solution.centers, vec![vec![0, 0, 0], vec![1, 1, 1]]);
        }
    }

    #[test]
    fn solve_reports_infeasible() {
        let alphabet = Alphabet::new(2).unwrap();
        let m = CategoricalMatrix::from_columns(alphabet, &[vec![0, 0], vec![1, 1]]).unwrap();
        // Exact fit required but both centers must be the zero column.
        let rels = RelationSet::new(2, vec![vec![vec![0, 0]]; 2]).unwrap();
        let inst = ConstrainedInstance::new(m, 2, 0, 0, rels).unwrap();
        for mode in [SolveMode::Direct, SolveMode::Hypergraph] {
            assert!(solve_constrained_default(&inst, mode).unwrap().is_none());
        }
    }

    #[test]
    fn work_ceiling_guard_trips() {
        let alphabet = Alphabet::new(2).unwrap();
        let m = CategoricalMatrix::from_columns(alphabet, &[vec![0, 1], vec![1, 0]]).unwrap();
        let rels = RelationSet::full(alphabet, 2, 2).unwrap();
        let inst = ConstrainedInstance::new(m, 2, 1, 0, rels).unwrap();
        let err = solve_constrained(&inst, SolveMode::Direct, 1).unwrap_err();
        assert!(matches!(err, Error::WorkCeilingExceeded { .. }));
    }
}
