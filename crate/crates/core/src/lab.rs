//! Instance generators and exhaustive reference oracles.
//!
//! The oracles enumerate the full search space of each problem and are the
//! ground truth the solvers are tested against. They never sample; a size
//! guard rejects instances whose state count exceeds the configured limit.
//! The generators produce planted instances with a known feasible solution
//! and graph gadget instances whose yes/no status encodes independent-set
//! and partial-vertex-cover questions.

use crate::column_outliers::WeightedColumn;
use crate::constrained::ConstrainedInstance;
use crate::error::{Error, Result};
use crate::feature_selection::FeatureSelectionInstance;
use crate::lowrank::{combination_vectors, LowRankInstance, LowRankSemantics};
use crate::model::{
    hamming, Alphabet, CategoricalMatrix, ClusteringSolution, FeatureSelectionSolution, Symbol,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default bound on the number of oracle states.
pub const DEFAULT_ORACLE_GUARD: u128 = 100_000_000;

// ---------------------------------------------------------------------------
// Planted instances
// ---------------------------------------------------------------------------

/// Parameters of a planted instance: `k` random centers replicated into
/// clusters, `noise_edits` random single-cell edits, and `outlier_count`
/// junk columns (or randomized rows for feature selection).
#[derive(Debug, Clone, Copy)]
pub struct PlantedSpec {
    pub rows: usize,
    pub cols: usize,
    pub k: usize,
    pub alphabet_size: usize,
    pub noise_edits: usize,
    pub outlier_count: usize,
    pub seed: u64,
}

fn random_column(rng: &mut ChaCha8Rng, rows: usize, alphabet: usize) -> Vec<Symbol> {
    (0..rows).map(|_| rng.gen_range(0..alphabet) as Symbol).collect()
}

/// Planted k-clustering-with-column-outliers instance. The planted solution
/// is feasible for budget `noise_edits` by construction; the true optimum
/// may be smaller.
pub fn generate_planted_clustering(
    spec: &PlantedSpec,
) -> Result<(CategoricalMatrix, ClusteringSolution)> {
    if spec.outlier_count >= spec.cols {
        return Err(Error::InvalidInstance("outlier count must be < column count".into()));
    }
    if spec.k == 0 || spec.rows == 0 {
        return Err(Error::InvalidInstance("k and row count must be >= 1".into()));
    }
    let alphabet = Alphabet::new(spec.alphabet_size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centers: Vec<Vec<Symbol>> =
        (0..spec.k).map(|_| random_column(&mut rng, spec.rows, spec.alphabet_size)).collect();
    let inliers = spec.cols - spec.outlier_count;
    let assignment: Vec<usize> = (0..inliers).map(|_| rng.gen_range(0..spec.k)).collect();
    let mut columns: Vec<Vec<Symbol>> =
        assignment.iter().map(|&t| centers[t].clone()).collect();
    for _ in 0..spec.noise_edits {
        let j = rng.gen_range(0..inliers);
        let i = rng.gen_range(0..spec.rows);
        let fresh = if spec.alphabet_size > 1 {
            let old = columns[j][i];
            let mut s = rng.gen_range(0..spec.alphabet_size - 1) as Symbol;
            if s >= old {
                s += 1;
            }
            s
        } else {
            0
        };
        columns[j][i] = fresh;
    }
    for _ in 0..spec.outlier_count {
        columns.push(random_column(&mut rng, spec.rows, spec.alphabet_size));
    }
    let matrix = CategoricalMatrix::from_columns(alphabet, &columns)?;
    let mut clusters = vec![Vec::new(); spec.k];
    for (j, &t) in assignment.iter().enumerate() {
        clusters[t].push(j);
    }
    let mut solution = ClusteringSolution {
        outliers: (inliers..spec.cols).collect(),
        clusters,
        centers,
        cost: 0,
    };
    solution.cost = crate::model::solution_cost(&matrix, &solution)?;
    Ok((matrix, solution))
}

/// Planted feature-selection instance: `outlier_count` rows are filled with
/// junk, and noise is applied on the kept rows only, so the planted solution
/// costs at most `noise_edits`.
pub fn generate_planted_feature_selection(
    spec: &PlantedSpec,
) -> Result<(FeatureSelectionInstance, FeatureSelectionSolution)> {
    if spec.outlier_count >= spec.rows {
        return Err(Error::InvalidInstance("outlier count must be < row count".into()));
    }
    if spec.k == 0 || spec.cols == 0 {
        return Err(Error::InvalidInstance("k and column count must be >= 1".into()));
    }
    let alphabet = Alphabet::new(spec.alphabet_size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centers: Vec<Vec<Symbol>> =
        (0..spec.k).map(|_| random_column(&mut rng, spec.rows, spec.alphabet_size)).collect();
    let assignment: Vec<usize> = (0..spec.cols).map(|_| rng.gen_range(0..spec.k)).collect();
    let mut columns: Vec<Vec<Symbol>> =
        assignment.iter().map(|&t| centers[t].clone()).collect();

    let mut removed: Vec<usize> = Vec::new();
    while removed.len() < spec.outlier_count {
        let r = rng.gen_range(0..spec.rows);
        if !removed.contains(&r) {
            removed.push(r);
        }
    }
    removed.sort_unstable();
    let kept: Vec<usize> = (0..spec.rows).filter(|r| !removed.contains(r)).collect();

    for _ in 0..spec.noise_edits {
        let j = rng.gen_range(0..spec.cols);
        let i = kept[rng.gen_range(0..kept.len())];
        let fresh = if spec.alphabet_size > 1 {
            let old = columns[j][i];
            let mut s = rng.gen_range(0..spec.alphabet_size - 1) as Symbol;
            if s >= old {
                s += 1;
            }
            s
        } else {
            0
        };
        columns[j][i] = fresh;
    }
    for &r in &removed {
        for col in columns.iter_mut() {
            col[r] = rng.gen_range(0..spec.alphabet_size) as Symbol;
        }
    }

    let matrix = CategoricalMatrix::from_columns(alphabet, &columns)?;
    let instance = FeatureSelectionInstance::new(
        matrix,
        spec.k,
        spec.noise_edits as u64,
        spec.outlier_count,
    )?;
    let mut point_clusters = vec![Vec::new(); spec.k];
    for (j, &t) in assignment.iter().enumerate() {
        point_clusters[t].push(j);
    }
    let restricted_centers: Vec<Vec<Symbol>> = centers
        .iter()
        .map(|c| kept.iter().map(|&r| c[r]).collect())
        .collect();
    let mut cost = 0u64;
    for (t, members) in point_clusters.iter().enumerate() {
        for &j in members {
            let col: Vec<Symbol> =
                kept.iter().map(|&r| instance.matrix.get(r, j)).collect();
            cost += hamming(&col, &restricted_centers[t]) as u64;
        }
    }
    let solution = FeatureSelectionSolution {
        removed_features: removed,
        point_clusters,
        centers: restricted_centers,
        cost,
    };
    Ok((instance, solution))
}

// ---------------------------------------------------------------------------
// Graph gadgets
// ---------------------------------------------------------------------------

/// A simple undirected graph, vertices `0..vertex_count`. Edges are stored in
/// input order (normalized to (min, max) and deduplicated).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidInstance(format!("self-loop at vertex {}", u + 1)));
            }
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidInstance(format!(
                    "edge ({}, {}) out of range",
                    u + 1,
                    v + 1
                )));
            }
            let e = (u.min(v), u.max(v));
            if !out.contains(&e) {
                out.push(e);
            }
        }
        Ok(Graph { vertex_count, edges: out })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Vertex-by-edge incidence matrix over {0, 1}.
    pub fn incidence_matrix(&self) -> Result<CategoricalMatrix> {
        let (m, n) = (self.vertex_count, self.edges.len());
        if n == 0 {
            return Err(Error::InvalidInstance("graph without edges has an empty incidence matrix".into()));
        }
        let mut cells = vec![0 as Symbol; m * n];
        for (j, &(u, v)) in self.edges.iter().enumerate() {
            cells[u * n + j] = 1;
            cells[v * n + j] = 1;
        }
        CategoricalMatrix::new(Alphabet::new(2)?, m, n, cells)
    }
}

/// Feature-selection instance encoding "does `graph` have an independent set
/// of size t": the incidence matrix with `k = t + 1`, `l = |V| - t`, `B = 0`.
///
/// With `augment` the graph is first extended by a (t+2)-clique connected to
/// every original vertex, which makes the encoding an exact equivalence for
/// every input graph. The raw variant (no augmentation) requires at least one
/// edge and is only an equivalence for graphs already satisfying the
/// saturation assumption.
pub fn gadget_independent_set(
    graph: &Graph,
    t: usize,
    augment: bool,
) -> Result<FeatureSelectionInstance> {
    if t == 0 {
        return Err(Error::InvalidInstance("independent-set gadget needs t >= 1".into()));
    }
    let g = if augment {
        let base = graph.vertex_count;
        let clique = t + 2;
        let mut edges = graph.edges.clone();
        for c in 0..clique {
            for v in 0..base {
                edges.push((v, base + c));
            }
        }
        for c1 in 0..clique {
            for c2 in c1 + 1..clique {
                edges.push((base + c1, base + c2));
            }
        }
        Graph::new(base + clique, &edges)?
    } else {
        graph.clone()
    };
    let matrix = g.incidence_matrix()?;
    let vertices = g.vertex_count;
    if t >= vertices {
        return Err(Error::InvalidInstance("t must be smaller than the vertex count".into()));
    }
    FeatureSelectionInstance::new(matrix, t + 1, 0, vertices - t)
}

/// Feature-selection instance encoding "can t vertices of `graph` cover at
/// least q edges". The graph is extended by two universal vertices and
/// `5 + t + |E| - q` padding vertices before taking the incidence matrix.
pub fn gadget_partial_vertex_cover(
    graph: &Graph,
    t: usize,
    q: usize,
) -> Result<FeatureSelectionInstance> {
    let e_count = graph.edges.len();
    if q > e_count {
        return Err(Error::InvalidInstance(format!(
            "q = {q} exceeds the edge count {e_count}"
        )));
    }
    let base = graph.vertex_count;
    let d = 5 + t + e_count - q;
    let total = base + 2 + d;
    let mut edges = graph.edges.clone();
    // Two universal vertices adjacent to everything, including each other.
    for p in [base, base + 1] {
        for v in 0..total {
            if v != p {
                edges.push((p.min(v), p.max(v)));
            }
        }
    }
    let g = Graph::new(total, &edges)?;
    let e_total = g.edges.len();
    debug_assert_eq!(e_total, e_count + 2 * total - 3);
    let t_prime = t + 2;
    let q_prime = q + 2 * total - 3;
    let k = 1 + total - t_prime + e_total - q_prime;
    let matrix = g.incidence_matrix()?;
    FeatureSelectionInstance::new(matrix, k, 0, t_prime)
}

/// Direct exhaustive check: does the graph contain an independent set of
/// size `t`?
pub fn has_independent_set(graph: &Graph, t: usize) -> bool {
    if t == 0 {
        return true;
    }
    if t > graph.vertex_count {
        return false;
    }
    let mut subset = Vec::new();
    subsets_of_size(graph.vertex_count, t, 0, &mut subset, &mut |s| {
        graph
            .edges
            .iter()
            .all(|&(u, v)| !(s.contains(&u) && s.contains(&v)))
    })
}

/// Direct exhaustive check: can at most `t` vertices cover at least `q`
/// edges?
pub fn has_partial_vertex_cover(graph: &Graph, t: usize, q: usize) -> bool {
    if q == 0 {
        return true;
    }
    for size in 0..=t.min(graph.vertex_count) {
        let mut subset = Vec::new();
        let found = subsets_of_size(graph.vertex_count, size, 0, &mut subset, &mut |s| {
            graph
                .edges
                .iter()
                .filter(|&&(u, v)| s.contains(&u) || s.contains(&v))
                .count()
                >= q
        });
        if found {
            return true;
        }
    }
    false
}

/// Visits subsets of exactly `size` elements until the predicate holds.
fn subsets_of_size(
    n: usize,
    size: usize,
    start: usize,
    subset: &mut Vec<usize>,
    pred: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if subset.len() == size {
        return pred(subset);
    }
    for i in start..n {
        subset.push(i);
        if subsets_of_size(n, size, i + 1, subset, pred) {
            subset.pop();
            return true;
        }
        subset.pop();
    }
    false
}

// ---------------------------------------------------------------------------
// Exhaustive oracles
// ---------------------------------------------------------------------------

fn guard_check(states: u128, guard: u128) -> Result<()> {
    if states > guard {
        return Err(Error::OracleGuardExceeded { estimated: states, guard });
    }
    Ok(())
}

/// Visits all subsets of `{0..n-1}` of size 0..=cap.
fn for_each_subset_upto(
    n: usize,
    cap: usize,
    visit: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    fn rec(
        n: usize,
        cap: usize,
        start: usize,
        subset: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        visit(subset)?;
        if subset.len() == cap {
            return Ok(());
        }
        for i in start..n {
            subset.push(i);
            rec(n, cap, i + 1, subset, visit)?;
            subset.pop();
        }
        Ok(())
    }
    let mut subset = Vec::new();
    rec(n, cap, 0, &mut subset, visit)
}

/// Groups equal columns (restricted to `kept_rows`) of the given column set
/// into (column, weight) pairs.
fn collapse_columns(
    matrix: &CategoricalMatrix,
    kept_rows: &[usize],
    columns: &[usize],
) -> Vec<(Vec<Symbol>, u64)> {
    let mut out: Vec<(Vec<Symbol>, u64)> = Vec::new();
    for &j in columns {
        let col: Vec<Symbol> = kept_rows.iter().map(|&r| matrix.get(r, j)).collect();
        match out.iter_mut().find(|(c, _)| *c == col) {
            Some((_, w)) => *w += 1,
            None => out.push((col, 1)),
        }
    }
    out
}

/// Optimal feature-selection cost: minimum over all removable row subsets of
/// the best k-clustering of the restricted columns (plurality centers are
/// optimal per row, and identical restricted columns can always share a
/// cluster, so assignments over distinct restricted columns are exhaustive).
pub fn oracle_feature_selection_cost(
    matrix: &CategoricalMatrix,
    k: usize,
    outlier_cap: usize,
    guard: u128,
) -> Result<u64> {
    let m = matrix.rows();
    let all_columns: Vec<usize> = (0..matrix.cols()).collect();
    let alphabet = matrix.alphabet().size();
    let mut states: u128 = 0;
    let mut best = u64::MAX;
    for_each_subset_upto(m, outlier_cap.min(m.saturating_sub(1)), &mut |removed| {
        let kept: Vec<usize> = (0..m).filter(|r| !removed.contains(r)).collect();
        let groups = collapse_columns(matrix, &kept, &all_columns);
        let assignments = (k as u128).saturating_pow(groups.len() as u32);
        states = states.saturating_add(assignments);
        guard_check(states, guard)?;
        let cost = cheapest_assignment(&groups, k, alphabet);
        best = best.min(cost);
        Ok(())
    })?;
    Ok(best)
}

fn cheapest_assignment(groups: &[(Vec<Symbol>, u64)], k: usize, alphabet: usize) -> u64 {
    if groups.is_empty() {
        return 0;
    }
    let rows = groups[0].0.len();
    let beta = groups.len();
    let mut assignment = vec![0usize; beta];
    let mut best = u64::MAX;
    loop {
        // Plurality center per row per cluster: pay total weight minus the
        // heaviest symbol.
        let mut cost = 0u64;
        for r in 0..rows {
            let mut counts = vec![vec![0u64; alphabet]; k];
            for (g, &(ref col, w)) in groups.iter().enumerate().map(|(i, g)| (assignment[i], g)) {
                counts[g][col[r] as usize] += w;
            }
            for cluster in &counts {
                let total: u64 = cluster.iter().sum();
                let top = cluster.iter().max().copied().unwrap_or(0);
                cost += total - top;
            }
        }
        best = best.min(cost);
        let mut slot = 0;
        loop {
            if slot == beta {
                return best;
            }
            assignment[slot] += 1;
            if assignment[slot] < k {
                break;
            }
            assignment[slot] = 0;
            slot += 1;
        }
    }
}

/// Feature-selection decision at the instance's own budget. The zero-budget
/// case short-circuits to counting distinct restricted columns, which is the
/// exact criterion for a zero-cost clustering and sidesteps the assignment
/// enumeration on gadget-sized instances.
pub fn oracle_feature_selection_decision(
    instance: &FeatureSelectionInstance,
    guard: u128,
) -> Result<bool> {
    let matrix = &instance.matrix;
    let m = matrix.rows();
    if instance.budget == 0 {
        let mut states: u128 = 0;
        let mut feasible = false;
        for_each_subset_upto(m, instance.outlier_cap.min(m - 1), &mut |removed| {
            states = states.saturating_add(matrix.cols() as u128);
            guard_check(states, guard)?;
            if feasible {
                return Ok(());
            }
            let kept: Vec<usize> = (0..m).filter(|r| !removed.contains(r)).collect();
            let all: Vec<usize> = (0..matrix.cols()).collect();
            let distinct = collapse_columns(matrix, &kept, &all).len();
            if distinct <= instance.k {
                feasible = true;
            }
            Ok(())
        })?;
        return Ok(feasible);
    }
    let cost =
        oracle_feature_selection_cost(matrix, instance.k, instance.outlier_cap, guard)?;
    Ok(cost <= instance.budget)
}

/// Optimal constrained-clustering cost by full enumeration of outlier sets,
/// labeled cluster assignments, and per-row relation elements.
pub fn oracle_constrained_cost(instance: &ConstrainedInstance, guard: u128) -> Result<u64> {
    let matrix = &instance.matrix;
    let (m, n, k) = (matrix.rows(), matrix.cols(), instance.k);
    let mut states: u128 = 0;
    let mut best = u64::MAX;
    for_each_subset_upto(n, instance.outlier_cap, &mut |outliers| {
        let inliers: Vec<usize> = (0..n).filter(|j| !outliers.contains(j)).collect();
        let assignments = (k as u128).saturating_pow(inliers.len() as u32);
        states = states.saturating_add(assignments);
        guard_check(states, guard)?;
        let mut assignment = vec![0usize; inliers.len()];
        loop {
            // Per row, the cheapest relation element given the assignment.
            let mut cost = 0u64;
            for row in 0..m {
                let mut best_row = u64::MAX;
                for z in instance.relations.row(row) {
                    let mut c = 0u64;
                    for (slot, &j) in inliers.iter().enumerate() {
                        if matrix.get(row, j) != z[assignment[slot]] {
                            c += 1;
                        }
                    }
                    best_row = best_row.min(c);
                }
                cost += best_row;
            }
            best = best.min(cost);
            let mut slot = 0;
            loop {
                if slot == inliers.len() {
                    return Ok(());
                }
                assignment[slot] += 1;
                if assignment[slot] < k {
                    break;
                }
                assignment[slot] = 0;
                slot += 1;
            }
        }
    })?;
    Ok(best)
}

/// Optimal k-clustering-with-column-outliers cost: all outlier subsets, then
/// assignments of the distinct remaining columns with plurality centers.
pub fn oracle_column_outliers_cost(
    matrix: &CategoricalMatrix,
    k: usize,
    outlier_cap: usize,
    guard: u128,
) -> Result<u64> {
    let n = matrix.cols();
    let kept_rows: Vec<usize> = (0..matrix.rows()).collect();
    let alphabet = matrix.alphabet().size();
    let mut states: u128 = 0;
    let mut best = u64::MAX;
    for_each_subset_upto(n, outlier_cap.min(n - 1), &mut |outliers| {
        let inliers: Vec<usize> = (0..n).filter(|j| !outliers.contains(j)).collect();
        let groups = collapse_columns(matrix, &kept_rows, &inliers);
        let assignments = (k as u128).saturating_pow(groups.len() as u32);
        states = states.saturating_add(assignments);
        guard_check(states, guard)?;
        best = best.min(cheapest_assignment(&groups, k, alphabet));
        Ok(())
    })?;
    Ok(best)
}

/// Optimal restricted-clustering cost: all selections crossed with all
/// `|Σ|^m` centers.
pub fn oracle_restricted_cost(
    sets: &[Vec<WeightedColumn>],
    alphabet: Alphabet,
    guard: u128,
) -> Result<u64> {
    assert!(!sets.is_empty() && sets.iter().all(|s| !s.is_empty()));
    let m = sets[0][0].column.len();
    let selections: u128 = sets.iter().fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128));
    let centers = (alphabet.size() as u128).saturating_pow(m as u32);
    guard_check(selections.saturating_mul(centers), guard)?;

    let mut center = vec![0 as Symbol; m];
    let mut best = u64::MAX;
    loop {
        // For a fixed center the selections decouple per set.
        let mut cost = 0u64;
        for set in sets {
            cost += set
                .iter()
                .map(|wc| wc.weight * hamming(&wc.column, &center) as u64)
                .min()
                .expect("non-empty set");
        }
        best = best.min(cost);
        let mut slot = 0;
        loop {
            if slot == m {
                return Ok(best);
            }
            center[slot] += 1;
            if (center[slot] as usize) < alphabet.size() {
                break;
            }
            center[slot] = 0;
            slot += 1;
        }
    }
}

/// Optimal robust low-rank cost by enumerating every generator matrix; per
/// column the best combination is independent, and the `outlier_cap` worst
/// columns are discarded for free.
pub fn oracle_lowrank_cost(instance: &LowRankInstance, guard: u128) -> Result<u64> {
    let a = &instance.matrix;
    let (m, n) = (a.rows(), a.cols());
    let p = a.alphabet().size();
    let base = match instance.semantics {
        LowRankSemantics::FiniteField => p,
        LowRankSemantics::Boolean => 2,
    };
    let combos = combination_vectors(instance);
    let gen_cells = m * instance.rank;
    let gen_count = (base as u128).saturating_pow(gen_cells as u32);
    guard_check(
        gen_count.saturating_mul(n as u128).saturating_mul(combos.len() as u128),
        guard,
    )?;

    let mut generators = vec![0 as Symbol; gen_cells];
    let mut best = u64::MAX;
    loop {
        let mut col_costs: Vec<u64> = Vec::with_capacity(n);
        for j in 0..n {
            let col = a.column(j);
            let cheapest = combos
                .iter()
                .map(|combo| {
                    (0..m)
                        .filter(|&i| {
                            let u = &generators[i * instance.rank..(i + 1) * instance.rank];
                            let value = match instance.semantics {
                                LowRankSemantics::FiniteField => {
                                    let s: usize = combo
                                        .iter()
                                        .zip(u)
                                        .map(|(&c, &g)| c as usize * g as usize)
                                        .sum();
                                    (s % p) as Symbol
                                }
                                LowRankSemantics::Boolean => combo
                                    .iter()
                                    .zip(u)
                                    .map(|(&c, &g)| c & g)
                                    .fold(0, |acc, b| acc | b),
                            };
                            value != col[i]
                        })
                        .count() as u64
                })
                .min()
                .expect("at least the zero combination");
            col_costs.push(cheapest);
        }
        col_costs.sort_unstable_by(|a, b| b.cmp(a));
        let total: u64 = col_costs[instance.outlier_cap.min(n)..].iter().sum();
        best = best.min(total);
        let mut slot = 0;
        loop {
            if slot == gen_cells {
                return Ok(best);
            }
            generators[slot] += 1;
            if (generators[slot] as usize) < base {
                break;
            }
            generators[slot] = 0;
            slot += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::column_outliers::{solve_column_outliers, SearchStrategy};
    use crate::constrained::SolveMode;
    use crate::feature_selection::verify_feature_selection;
    use crate::model::RelationSet;

    fn c5() -> Graph {
        Graph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap()
    }

    #[test]
    fn planted_is_deterministic_per_seed() {
        let spec = PlantedSpec {
            rows: 4,
            cols: 6,
            k: 2,
            alphabet_size: 2,
            noise_edits: 2,
            outlier_count: 1,
            seed: 99,
        };
        let (a, sol_a) = generate_planted_clustering(&spec).unwrap();
        let (b, sol_b) = generate_planted_clustering(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(sol_a, sol_b);
    }

    #[test]
    fn planted_noiseless_has_zero_optimum() {
        let spec = PlantedSpec {
            rows: 4,
            cols: 6,
            k: 2,
            alphabet_size: 2,
            noise_edits: 0,
            outlier_count: 0,
            seed: 5,
        };
        let (matrix, sol) = generate_planted_clustering(&spec).unwrap();
        assert_eq!(sol.cost, 0);
        assert_eq!(
            oracle_column_outliers_cost(&matrix, 2, 0, DEFAULT_ORACLE_GUARD).unwrap(),
            0
        );
    }

    #[test]
    fn planted_noisy_optimum_bounded_by_noise() {
        let spec = PlantedSpec {
            rows: 4,
            cols: 5,
            k: 2,
            alphabet_size: 2,
            noise_edits: 2,
            outlier_count: 1,
            seed: 7,
        };
        let (matrix, sol) = generate_planted_clustering(&spec).unwrap();
        assert!(sol.cost <= 2);
        let opt = oracle_column_outliers_cost(&matrix, 2, 1, DEFAULT_ORACLE_GUARD).unwrap();
        assert!(opt <= sol.cost);
    }

    #[test]
    fn c5_gadget_reproduces_incidence_matrix() {
        let fs = gadget_independent_set(&c5(), 2, false).unwrap();
        assert_eq!(fs.k, 3);
        assert_eq!(fs.outlier_cap, 3);
        assert_eq!(fs.budget, 0);
        assert_eq!(
            fs.matrix.cells(),
            &[
                1, 0, 0, 0, 1, //
                1, 1, 0, 0, 0, //
                0, 1, 1, 0, 0, //
                0, 0, 1, 1, 0, //
                0, 0, 0, 1, 1,
            ]
        );
    }

    #[test]
    fn triangle_has_no_independent_pair() {
        let k3 = Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(!has_independent_set(&k3, 2));
        let fs = gadget_independent_set(&k3, 2, true).unwrap();
        assert!(!oracle_feature_selection_decision(&fs, DEFAULT_ORACLE_GUARD).unwrap());
    }

    #[test]
    fn edgeless_graph_with_augmentation_is_yes() {
        let g = Graph::new(3, &[]).unwrap();
        assert!(has_independent_set(&g, 2));
        let fs = gadget_independent_set(&g, 2, true).unwrap();
        assert!(oracle_feature_selection_decision(&fs, DEFAULT_ORACLE_GUARD).unwrap());
    }

    #[test]
    fn pvc_gadget_examples() {
        // Star: the center covers all three edges.
        let star = Graph::new(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(has_partial_vertex_cover(&star, 1, 3));
        let fs = gadget_partial_vertex_cover(&star, 1, 3).unwrap();
        assert!(oracle_feature_selection_decision(&fs, DEFAULT_ORACLE_GUARD).unwrap());

        // Path on three vertices: the middle vertex covers both edges.
        let path = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(has_partial_vertex_cover(&path, 1, 2));
        let fs = gadget_partial_vertex_cover(&path, 1, 2).unwrap();
        assert!(oracle_feature_selection_decision(&fs, DEFAULT_ORACLE_GUARD).unwrap());

        // Two disjoint edges cannot be covered by one vertex.
        let disjoint = Graph::new(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(!has_partial_vertex_cover(&disjoint, 1, 2));
        let fs = gadget_partial_vertex_cover(&disjoint, 1, 2).unwrap();
        assert!(!oracle_feature_selection_decision(&fs, DEFAULT_ORACLE_GUARD).unwrap());
    }

    #[test]
    fn figure_instance_is_yes_under_oracle() {
        let fs = gadget_independent_set(&c5(), 2, false).unwrap();
        assert!(oracle_feature_selection_decision(&fs, DEFAULT_ORACLE_GUARD).unwrap());
        assert_eq!(
            oracle_feature_selection_cost(&fs.matrix, fs.k, fs.outlier_cap, DEFAULT_ORACLE_GUARD)
                .unwrap(),
            0
        );
    }

    #[test]
    fn toy_kcco_oracle_value() {
        // Regression constant fixed by this oracle's own exhaustive run.
        let matrix = CategoricalMatrix::from_columns(
            Alphabet::new(2).unwrap(),
            &[
                vec![0, 0, 0, 0],
                vec![0, 0, 0, 1],
                vec![1, 1, 0, 0],
                vec![1, 1, 0, 1],
                vec![1, 0, 1, 0],
            ],
        )
        .unwrap();
        assert_eq!(
            oracle_column_outliers_cost(&matrix, 2, 1, DEFAULT_ORACLE_GUARD).unwrap(),
            2
        );
    }

    #[test]
    fn identical_columns_oracle_is_zero() {
        let matrix = CategoricalMatrix::from_columns(
            Alphabet::new(3).unwrap(),
            &[vec![2, 1], vec![2, 1], vec![2, 1]],
        )
        .unwrap();
        assert_eq!(
            oracle_column_outliers_cost(&matrix, 1, 0, DEFAULT_ORACLE_GUARD).unwrap(),
            0
        );
        assert_eq!(
            oracle_feature_selection_cost(&matrix, 1, 0, DEFAULT_ORACLE_GUARD).unwrap(),
            0
        );
    }

    #[test]
    fn oracle_guard_trips() {
        let matrix = CategoricalMatrix::from_columns(
            Alphabet::new(2).unwrap(),
            &(0..10).map(|j| vec![(j % 2) as Symbol; 4]).collect::<Vec<_>>(),
        )
        .unwrap();
        let err = oracle_column_outliers_cost(&matrix, 2, 1, 2).unwrap_err();
        assert!(matches!(err, Error::OracleGuardExceeded { .. }));
    }

    #[test]
    fn oracle_monotone_in_k_and_outliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let rows = rng.gen_range(2..5);
            let cols = rng.gen_range(2..6);
            let cells: Vec<Symbol> =
                (0..rows * cols).map(|_| rng.gen_range(0..2)).collect();
            let matrix =
                CategoricalMatrix::new(Alphabet::new(2).unwrap(), rows, cols, cells).unwrap();
            let mut last = u64::MAX;
            for k in 1..=3 {
                let c = oracle_column_outliers_cost(&matrix, k, 0, DEFAULT_ORACLE_GUARD).unwrap();
                assert!(c <= last);
                last = c;
            }
            let mut last = u64::MAX;
            for cap in 0..cols.min(3) {
                let c =
                    oracle_column_outliers_cost(&matrix, 2, cap, DEFAULT_ORACLE_GUARD).unwrap();
                assert!(c <= last);
                last = c;
            }
        }
    }

    #[test]
    fn plurality_matches_full_center_enumeration() {
        // On tiny instances, per-row plurality equals the best of all centers.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let rows = rng.gen_range(1..4);
            let cols = rng.gen_range(1..5);
            let columns: Vec<Vec<Symbol>> = (0..cols)
                .map(|_| (0..rows).map(|_| rng.gen_range(0..2)).collect())
                .collect();
            let groups: Vec<(Vec<Symbol>, u64)> =
                columns.iter().map(|c| (c.clone(), 1)).collect();
            let plurality = cheapest_assignment(&groups, 1, 2);
            // Enumerate all centers directly.
            let mut best = u64::MAX;
            for mask in 0..1u32 << rows {
                let center: Vec<Symbol> =
                    (0..rows).map(|r| (mask >> r & 1) as Symbol).collect();
                let cost: u64 =
                    columns.iter().map(|c| hamming(c, &center) as u64).sum();
                best = best.min(cost);
            }
            assert_eq!(plurality, best);
        }
    }

    #[test]
    fn constrained_oracle_respects_relations() {
        let matrix = CategoricalMatrix::from_columns(
            Alphabet::new(2).unwrap(),
            &[vec![0, 0], vec![1, 1]],
        )
        .unwrap();
        let relations = RelationSet::new(1, vec![vec![vec![0]]; 2]).unwrap();
        let inst = ConstrainedInstance::new(matrix, 1, 2, 0, relations).unwrap();
        // Center forced to the zero column; column (1,1) costs 2.
        assert_eq!(oracle_constrained_cost(&inst, DEFAULT_ORACLE_GUARD).unwrap(), 2);
    }

    #[test]
    fn planted_fs_solution_verifies() {
        let spec = PlantedSpec {
            rows: 5,
            cols: 4,
            k: 2,
            alphabet_size: 2,
            noise_edits: 1,
            outlier_count: 1,
            seed: 13,
        };
        let (instance, solution) = generate_planted_feature_selection(&spec).unwrap();
        assert!(solution.cost <= 1);
        assert_eq!(verify_feature_selection(&instance, &solution), Ok(()));
    }

    #[test]
    fn solver_matches_oracle_on_planted() {
        let spec = PlantedSpec {
            rows: 4,
            cols: 6,
            k: 2,
            alphabet_size: 2,
            noise_edits: 2,
            outlier_count: 1,
            seed: 23,
        };
        let (matrix, _) = generate_planted_clustering(&spec).unwrap();
        let oracle = oracle_column_outliers_cost(&matrix, 2, 1, DEFAULT_ORACLE_GUARD).unwrap();
        let sol = solve_column_outliers(
            &matrix,
            2,
            2,
            1,
            SearchStrategy::Exhaustive,
            SolveMode::Direct,
        )
        .unwrap();
        match sol {
            Some(s) => assert_eq!(s.cost, oracle),
            None => assert!(oracle > 2),
        }
    }
}
