//! Exact k-clustering with column outliers.
//!
//! Identical columns are grouped into weighted initial clusters and treated
//! as indivisible units: an optimal solution can always be rearranged so that
//! every initial cluster is wholly inside one solution cluster, wholly among
//! the outliers, or (for at most one of them) split between one cluster and
//! the outliers. The solver guesses the split cluster, searches over which
//! initial clusters merge into composite clusters, solves one weighted
//! single-center subproblem per composite cluster, and packs the remaining
//! initial clusters greedily into the outlier pool.
//!
//! Composite participants are located either exhaustively (every small subset
//! of initial clusters) or by color coding (random 2B-colorings, one
//! candidate per color class); exhaustive mode is exact, trials mode finds
//! the optimum with probability growing in the trial count.

use crate::constrained::{all_subsets, SolveMode};
use crate::error::{Error, Result};
use crate::hypergraph::{
    build_difference_hypergraph, edge_budget_cap, enumerate_patterns_exact, find_occurrences,
    DiffTuple,
};
use crate::model::{
    check_partition, hamming, Alphabet, CategoricalMatrix, ClusteringSolution, Symbol,
    VerifyFailure,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::{BTreeSet, HashMap};

/// Groups of identical columns with their multiplicities and original
/// column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialClusters {
    pub columns: Vec<Vec<Symbol>>,
    pub weights: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

impl InitialClusters {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Partitions the columns into maximal groups of identical columns, in
/// first-occurrence order.
pub fn group_columns(matrix: &CategoricalMatrix) -> InitialClusters {
    let mut columns: Vec<Vec<Symbol>> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for j in 0..matrix.cols() {
        let col = matrix.column(j);
        match columns.iter().position(|c| *c == col) {
            Some(g) => members[g].push(j),
            None => {
                columns.push(col);
                members.push(vec![j]);
            }
        }
    }
    let weights = members.iter().map(|m| m.len()).collect();
    InitialClusters { columns, weights, members }
}

/// One candidate column of a restricted-clustering set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedColumn {
    pub column: Vec<Symbol>,
    pub weight: u64,
}

/// A solved restricted-clustering instance: the chosen column per set, the
/// center, and the weighted cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedPick {
    pub choices: Vec<usize>,
    pub center: Vec<Symbol>,
    pub cost: u64,
}

/// Picks one weighted column from each set and a center minimizing the total
/// weighted Hamming cost; `None` when even the optimum exceeds `budget`.
///
/// Direct mode guesses a column of the first set and rewrites at most
/// `budget` of its rows with arbitrary symbols. Hypergraph mode builds the
/// weighted difference hypergraph around every candidate column and takes
/// rewrite positions from pattern occurrences.
pub fn solve_restricted(
    sets: &[Vec<WeightedColumn>],
    budget: u64,
    mode: SolveMode,
    alphabet: Alphabet,
) -> Option<RestrictedPick> {
    assert!(!sets.is_empty() && sets.iter().all(|s| !s.is_empty()));
    let m = sets[0][0].column.len();
    let budget_rows = (budget as usize).min(m);

    let mut candidates: BTreeSet<Vec<Symbol>> = BTreeSet::new();
    match mode {
        SolveMode::Direct => {
            for base in &sets[0] {
                rewrite_candidates(&base.column, budget_rows, alphabet, &mut candidates);
            }
        }
        SolveMode::Hypergraph => {
            let all: Vec<&WeightedColumn> = sets.iter().flatten().collect();
            for base in &all {
                candidates.insert(base.column.clone());
                if budget_rows == 0 {
                    continue;
                }
                let x = vec![base.column.clone()];
                let host = build_difference_hypergraph(
                    &x,
                    all.iter().enumerate().map(|(payload, wc)| DiffTuple {
                        columns: vec![wc.column.as_slice()],
                        weight: wc.weight,
                        payload,
                    }),
                    2 * budget_rows,
                );
                let mut positions: BTreeSet<Vec<usize>> = BTreeSet::new();
                for e in 1..=edge_budget_cap(budget_rows) {
                    for v in 1..=budget_rows.min(host.vertices().len()) {
                        for pattern in enumerate_patterns_exact(v, e) {
                            for occ in find_occurrences(&pattern, &host) {
                                positions.insert(occ);
                            }
                        }
                    }
                }
                for pos in positions {
                    rewrite_at(&base.column, &pos, alphabet, &mut candidates);
                }
            }
        }
    }

    let mut best: Option<RestrictedPick> = None;
    for center in candidates {
        let mut cost = 0u64;
        let mut choices = Vec::with_capacity(sets.len());
        for set in sets {
            let (choice, c) = set
                .iter()
                .enumerate()
                .map(|(i, wc)| (i, wc.weight * hamming(&wc.column, &center) as u64))
                .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
                .expect("non-empty set");
            choices.push(choice);
            cost += c;
        }
        if cost > budget {
            continue;
        }
        let cand = RestrictedPick { choices, center, cost };
        let better = match &best {
            None => true,
            Some(b) => (cand.cost, &cand.center, &cand.choices) < (b.cost, &b.center, &b.choices),
        };
        if better {
            best = Some(cand);
        }
    }
    best
}

fn rewrite_candidates(
    base: &[Symbol],
    budget_rows: usize,
    alphabet: Alphabet,
    out: &mut BTreeSet<Vec<Symbol>>,
) {
    out.insert(base.to_vec());
    let mut subset = Vec::new();
    all_subsets(base.len(), budget_rows, 0, &mut subset, &mut |positions| {
        rewrite_at(base, positions, alphabet, out);
    });
}

fn rewrite_at(
    base: &[Symbol],
    positions: &[usize],
    alphabet: Alphabet,
    out: &mut BTreeSet<Vec<Symbol>>,
) {
    let mut pick = vec![0 as Symbol; positions.len()];
    loop {
        let mut center = base.to_vec();
        for (slot, &h) in positions.iter().enumerate() {
            center[h] = pick[slot];
        }
        out.insert(center);
        let mut slot = 0;
        loop {
            if slot == positions.len() {
                return;
            }
            pick[slot] += 1;
            if (pick[slot] as usize) < alphabet.size() {
                break;
            }
            pick[slot] = 0;
            slot += 1;
        }
    }
}

/// How composite participants are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStrategy {
    /// Enumerate every subset of at most 2B initial clusters; exact.
    Exhaustive,
    /// Color-coding trials; exact with probability growing in `trials`.
    Trials { trials: usize, seed: u64 },
}

/// Trial count for failure probability <= 1% against any fixed instance:
/// `ceil(e^{2B} ln 100)`.
pub fn default_trials(budget: u64) -> usize {
    let b = budget as f64;
    ((2.0 * b).exp() * 100f64.ln()).ceil() as usize
}

struct Branch {
    /// (selected group ids, center, cost) per composite cluster.
    parts: Vec<(Vec<usize>, Vec<Symbol>, u64)>,
    packed: Vec<usize>,
    trivial: Vec<usize>,
    cost: u64,
}

/// Greedy outlier packing: keep at most `slots` initial clusters as trivial
/// clusters, outliering the rest smallest-first within `capacity` columns.
fn pack_outliers(
    unselected: &[usize],
    weights: &[usize],
    slots: usize,
    capacity: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    if unselected.len() <= slots {
        return Some((Vec::new(), unselected.to_vec()));
    }
    let mut order = unselected.to_vec();
    order.sort_by_key(|&g| (weights[g], g));
    let need = unselected.len() - slots;
    let mut used = 0usize;
    for &g in &order[..need] {
        used += weights[g];
        if used > capacity {
            return None;
        }
    }
    let packed = order[..need].to_vec();
    let mut trivial = order[need..].to_vec();
    trivial.sort_unstable();
    Some((packed, trivial))
}

/// Enumerates the unordered partitions of `items` into at most `max_parts`
/// non-empty parts (restricted-growth recursion; each partition visited
/// exactly once).
fn for_each_partition(
    items: &[usize],
    max_parts: usize,
    visit: &mut impl FnMut(&[Vec<usize>]),
) {
    fn rec(
        items: &[usize],
        at: usize,
        max_parts: usize,
        parts: &mut Vec<Vec<usize>>,
        visit: &mut impl FnMut(&[Vec<usize>]),
    ) {
        if at == items.len() {
            visit(parts);
            return;
        }
        for i in 0..parts.len() {
            parts[i].push(items[at]);
            rec(items, at + 1, max_parts, parts, visit);
            parts[i].pop();
        }
        if parts.len() < max_parts {
            parts.push(vec![items[at]]);
            rec(items, at + 1, max_parts, parts, visit);
            parts.pop();
        }
    }
    if items.is_empty() {
        visit(&[]);
        return;
    }
    let mut parts: Vec<Vec<usize>> = Vec::new();
    rec(items, 0, max_parts, &mut parts, visit);
}

/// Solves k-clustering with column outliers exactly (exhaustive strategy) or
/// with one-sided error (trials strategy). Returns the cheapest solution of
/// cost at most `budget`, or `None`.
pub fn solve_column_outliers(
    matrix: &CategoricalMatrix,
    k: usize,
    budget: u64,
    outlier_cap: usize,
    strategy: SearchStrategy,
    mode: SolveMode,
) -> Result<Option<ClusteringSolution>> {
    if k == 0 {
        return Err(Error::InvalidInstance("k must be >= 1".into()));
    }
    if outlier_cap >= matrix.cols() {
        return Err(Error::InvalidInstance(format!(
            "outlier cap {} must be smaller than the column count {}",
            outlier_cap,
            matrix.cols()
        )));
    }
    let groups = group_columns(matrix);
    let beta = groups.len();

    // Split guesses: no split, or (group, columns moved to the outliers).
    let mut guesses: Vec<Option<(usize, usize)>> = vec![None];
    for t in 0..beta {
        for moved in 1..=outlier_cap.min(groups.weights[t]) {
            guesses.push(Some((t, moved)));
        }
    }

    let best = guesses
        .into_par_iter()
        .enumerate()
        .filter_map(|(guess_idx, guess)| {
            solve_split_guess(matrix, &groups, k, budget, outlier_cap, strategy, mode, guess, guess_idx as u64)
        })
        .reduce_with(|a, b| {
            if (a.cost, a.tie_key()) <= (b.cost, b.tie_key()) {
                a
            } else {
                b
            }
        });
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn solve_split_guess(
    matrix: &CategoricalMatrix,
    groups: &InitialClusters,
    k: usize,
    budget: u64,
    outlier_cap: usize,
    strategy: SearchStrategy,
    mode: SolveMode,
    guess: Option<(usize, usize)>,
    guess_idx: u64,
) -> Option<ClusteringSolution> {
    // Adjusted view after removing `moved` copies of the split group.
    let mut weights = groups.weights.clone();
    let mut split_outliers: Vec<usize> = Vec::new();
    let mut capacity = outlier_cap;
    if let Some((t, moved)) = guess {
        weights[t] -= moved;
        split_outliers = groups.members[t][weights[t]..].to_vec();
        capacity -= moved;
    }
    let active: Vec<usize> = (0..groups.len()).filter(|&g| weights[g] > 0).collect();
    let alphabet = matrix.alphabet();

    let mut memo: HashMap<Vec<Vec<usize>>, Option<RestrictedPick>> = HashMap::new();
    let mut solve_part = |part_sets: &[Vec<usize>]| -> Option<RestrictedPick> {
        let key: Vec<Vec<usize>> = part_sets.to_vec();
        if let Some(hit) = memo.get(&key) {
            return hit.clone();
        }
        let sets: Vec<Vec<WeightedColumn>> = part_sets
            .iter()
            .map(|set| {
                set.iter()
                    .map(|&g| WeightedColumn {
                        column: groups.columns[g].clone(),
                        weight: weights[g] as u64,
                    })
                    .collect()
            })
            .collect();
        let out = solve_restricted(&sets, budget, mode, alphabet);
        memo.insert(key, out.clone());
        out
    };

    let mut best: Option<ClusteringSolution> = None;
    let mut consider = |branch: Branch| {
        let solution = assemble(groups, &weights, &split_outliers, branch);
        let better = match &best {
            None => true,
            Some(b) => (solution.cost, solution.tie_key()) < (b.cost, b.tie_key()),
        };
        if better {
            best = Some(solution);
        }
    };

    // The branch with no composite clusters does not depend on the strategy.
    if let Some((packed, trivial)) = pack_outliers(&active, &weights, k, capacity) {
        consider(Branch { parts: Vec::new(), packed, trivial, cost: 0 });
    }

    if budget == 0 {
        return best;
    }
    let max_participants = (2 * budget as usize).min(active.len());
    let max_parts = (budget as usize).min(k);

    match strategy {
        SearchStrategy::Exhaustive => {
            let mut subset: Vec<usize> = Vec::new();
            let mut visit_subset = |participants: &[usize]| {
                for_each_partition(participants, max_parts, &mut |parts| {
                    // Every participant is selected: each part's sets are
                    // singletons.
                    let mut total = 0u64;
                    let mut gate = 0u64;
                    let mut solved: Vec<(Vec<usize>, Vec<Symbol>, u64)> = Vec::new();
                    for part in parts {
                        let sets: Vec<Vec<usize>> = part.iter().map(|&g| vec![g]).collect();
                        match solve_part(&sets) {
                            None => return,
                            Some(pick) => {
                                total += pick.cost;
                                gate += pick.cost.max(1);
                                solved.push((part.clone(), pick.center, pick.cost));
                            }
                        }
                    }
                    if gate > budget {
                        return;
                    }
                    let selected: BTreeSet<usize> = parts.iter().flatten().copied().collect();
                    let unselected: Vec<usize> =
                        active.iter().copied().filter(|g| !selected.contains(g)).collect();
                    let tau = parts.len();
                    if let Some((packed, trivial)) =
                        pack_outliers(&unselected, &weights, k - tau, capacity)
                    {
                        consider(Branch { parts: solved, packed, trivial, cost: total });
                    }
                });
            };
            // Non-empty subsets of the active groups, up to 2B participants.
            all_subsets(active.len(), max_participants, 0, &mut subset, &mut |s| {
                let participants: Vec<usize> = s.iter().map(|&i| active[i]).collect();
                visit_subset(&participants);
            });
        }
        SearchStrategy::Trials { trials, seed } => {
            let colors = 2 * budget as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed.wrapping_add(guess_idx.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            );
            for _ in 0..trials {
                let coloring: Vec<usize> =
                    active.iter().map(|_| rng.gen_range(0..colors)).collect();
                let mut classes: Vec<Vec<usize>> = vec![Vec::new(); colors];
                for (i, &g) in active.iter().enumerate() {
                    classes[coloring[i]].push(g);
                }
                let nonempty: Vec<usize> =
                    (0..colors).filter(|&c| !classes[c].is_empty()).collect();
                let mut subset: Vec<usize> = Vec::new();
                all_subsets(nonempty.len(), nonempty.len(), 0, &mut subset, &mut |s| {
                    let chosen_colors: Vec<usize> = s.iter().map(|&i| nonempty[i]).collect();
                    for_each_partition(&chosen_colors, max_parts, &mut |parts| {
                        let mut total = 0u64;
                        let mut gate = 0u64;
                        let mut solved: Vec<(Vec<usize>, Vec<Symbol>, u64)> = Vec::new();
                        for part in parts {
                            let sets: Vec<Vec<usize>> =
                                part.iter().map(|&c| classes[c].clone()).collect();
                            match solve_part(&sets) {
                                None => return,
                                Some(pick) => {
                                    let selected: Vec<usize> = pick
                                        .choices
                                        .iter()
                                        .zip(part.iter())
                                        .map(|(&choice, &c)| classes[c][choice])
                                        .collect();
                                    total += pick.cost;
                                    gate += pick.cost.max(1);
                                    solved.push((selected, pick.center, pick.cost));
                                }
                            }
                        }
                        if gate > budget {
                            return;
                        }
                        let selected: BTreeSet<usize> =
                            solved.iter().flat_map(|(gs, _, _)| gs.iter().copied()).collect();
                        let unselected: Vec<usize> =
                            active.iter().copied().filter(|g| !selected.contains(g)).collect();
                        let tau = solved.len();
                        if let Some((packed, trivial)) =
                            pack_outliers(&unselected, &weights, k - tau, capacity)
                        {
                            consider(Branch { parts: solved, packed, trivial, cost: total });
                        }
                    });
                });
            }
        }
    }

    best.filter(|s| s.cost <= budget)
}

/// Expands a branch over initial-cluster ids into a concrete solution over
/// original column indices.
fn assemble(
    groups: &InitialClusters,
    weights: &[usize],
    split_outliers: &[usize],
    branch: Branch,
) -> ClusteringSolution {
    let members_of = |g: usize| -> &[usize] { &groups.members[g][..weights[g]] };
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut centers: Vec<Vec<Symbol>> = Vec::new();
    for (part_groups, center, _) in &branch.parts {
        let mut members: Vec<usize> =
            part_groups.iter().flat_map(|&g| members_of(g).iter().copied()).collect();
        members.sort_unstable();
        clusters.push(members);
        centers.push(center.clone());
    }
    for &g in &branch.trivial {
        clusters.push(members_of(g).to_vec());
        centers.push(groups.columns[g].clone());
    }
    let mut outliers: Vec<usize> = split_outliers.to_vec();
    for &g in &branch.packed {
        outliers.extend_from_slice(members_of(g));
    }
    outliers.sort_unstable();
    ClusteringSolution { outliers, clusters, centers, cost: branch.cost }
}

/// Verifies the plain clustering-with-column-outliers predicate (no center
/// constraints): outlier cap, exact partition, at most k clusters, stored
/// cost consistent and within budget.
pub fn verify_column_outliers(
    matrix: &CategoricalMatrix,
    k: usize,
    budget: u64,
    outlier_cap: usize,
    solution: &ClusteringSolution,
) -> std::result::Result<(), VerifyFailure> {
    if solution.outliers.len() > outlier_cap {
        return Err(VerifyFailure::TooManyOutliers {
            got: solution.outliers.len(),
            cap: outlier_cap,
        });
    }
    if solution.clusters.len() > k {
        return Err(VerifyFailure::WrongCenterCount { got: solution.clusters.len(), expected: k });
    }
    if solution.centers.len() != solution.clusters.len() {
        return Err(VerifyFailure::WrongCenterCount {
            got: solution.centers.len(),
            expected: solution.clusters.len(),
        });
    }
    for center in &solution.centers {
        if center.len() != matrix.rows() {
            return Err(VerifyFailure::CenterLength {
                got: center.len(),
                expected: matrix.rows(),
            });
        }
    }
    check_partition(matrix.cols(), &solution.outliers, &solution.clusters)?;
    let mut cost = 0u64;
    for (members, center) in solution.clusters.iter().zip(&solution.centers) {
        for &j in members {
            cost += hamming(&matrix.column(j), center) as u64;
        }
    }
    if cost != solution.cost {
        return Err(VerifyFailure::CostMismatch { stored: solution.cost, actual: cost });
    }
    if cost > budget {
        return Err(VerifyFailure::CostExceedsBudget { cost, budget });
    }
    Ok(())
}

/// Classification of an initial cluster with respect to a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialClusterKind {
    /// (i) wholly inside one solution cluster.
    OneCluster,
    /// (ii) inside the union of clusters but split across several.
    AcrossClusters,
    /// (iii) wholly among the outliers.
    Outliers,
    /// (iv) split between exactly one cluster and the outliers.
    OneClusterAndOutliers,
    /// (v) split across several clusters and the outliers.
    AcrossClustersAndOutliers,
}

pub fn classify_initial_clusters(
    matrix: &CategoricalMatrix,
    solution: &ClusteringSolution,
) -> Vec<InitialClusterKind> {
    let groups = group_columns(matrix);
    let mut assignment: Vec<Option<usize>> = vec![None; matrix.cols()];
    for (t, members) in solution.clusters.iter().enumerate() {
        for &j in members {
            assignment[j] = Some(t);
        }
    }
    groups
        .members
        .iter()
        .map(|members| {
            let clusters_hit: BTreeSet<usize> =
                members.iter().filter_map(|&j| assignment[j]).collect();
            let outlier_count =
                members.iter().filter(|&&j| assignment[j].is_none()).count();
            match (clusters_hit.len(), outlier_count) {
                (1, 0) => InitialClusterKind::OneCluster,
                (_, 0) => InitialClusterKind::AcrossClusters,
                (0, _) => InitialClusterKind::Outliers,
                (1, _) => InitialClusterKind::OneClusterAndOutliers,
                (_, _) => InitialClusterKind::AcrossClustersAndOutliers,
            }
        })
        .collect()
}

/// Passes iff the solution is normalized: only kinds (i), (iii), (iv) occur,
/// with at most one initial cluster of kind (iv).
pub fn normalize_witness(matrix: &CategoricalMatrix, solution: &ClusteringSolution) -> bool {
    let kinds = classify_initial_clusters(matrix, solution);
    let split = kinds
        .iter()
        .filter(|k| matches!(k, InitialClusterKind::OneClusterAndOutliers))
        .count();
    kinds.iter().all(|k| {
        matches!(
            k,
            InitialClusterKind::OneCluster
                | InitialClusterKind::Outliers
                | InitialClusterKind::OneClusterAndOutliers
        )
    }) && split <= 1
}
