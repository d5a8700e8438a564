//! Hypergraph machinery behind the exact solvers: weighted difference
//! hypergraphs over row positions, small candidate patterns with a
//! quarter-cover admission check, and enumeration of the places where a
//! pattern appears in a host as a subhypergraph.
//!
//! A pattern `H` appears in a host `G` at `V'` as a subhypergraph if some
//! bijection `pi: V' -> V_H` exists such that every pattern edge `e` equals
//! `pi` applied to `E ∩ V'` for some host edge `E`. Only the vertex set `V'`
//! is reported; the solvers use it as a candidate set of deviating rows.

use crate::error::{Error, Result};
use crate::model::Symbol;
use std::collections::{BTreeMap, BTreeSet};

/// Host hypergraph over row positions. Edges form a multiset: equal supports
/// are merged and carry a total weight plus the payload of the first tuple
/// that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    vertices: Vec<usize>,
    edges: Vec<HostEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostEdge {
    /// Sorted vertex labels.
    pub support: Vec<usize>,
    /// Multiplicity of this support in the edge multiset.
    pub weight: u64,
    /// Identifier of the first originating tuple.
    pub payload: usize,
}

impl Hypergraph {
    pub fn new(mut vertices: Vec<usize>, edges: Vec<HostEdge>) -> Result<Self> {
        vertices.sort_unstable();
        vertices.dedup();
        for edge in &edges {
            if edge.weight == 0 {
                return Err(Error::InvalidInstance("edge with zero weight".into()));
            }
            for v in &edge.support {
                if vertices.binary_search(v).is_err() {
                    return Err(Error::InvalidInstance(format!(
                        "edge vertex {v} not among hypergraph vertices"
                    )));
                }
            }
        }
        Ok(Hypergraph { vertices, edges })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> &[HostEdge] {
        &self.edges
    }
}

/// One k-tuple of columns feeding the difference-hypergraph construction.
pub struct DiffTuple<'a> {
    pub columns: Vec<&'a [Symbol]>,
    pub weight: u64,
    pub payload: usize,
}

/// Builds the difference hypergraph of a stream of k-tuples against a fixed
/// refined tuple `x`: one edge per consumed tuple, supported on the rows
/// where the tuple disagrees with `x` coordinatewise. Empty edges and edges
/// larger than `size_cap` are discarded; the vertex set is the union of the
/// retained edges.
pub fn build_difference_hypergraph<'a, I>(
    x: &[Vec<Symbol>],
    tuples: I,
    size_cap: usize,
) -> Hypergraph
where
    I: IntoIterator<Item = DiffTuple<'a>>,
{
    let rows = x.first().map_or(0, |c| c.len());
    let mut merged: BTreeMap<Vec<usize>, (u64, usize)> = BTreeMap::new();
    for tuple in tuples {
        debug_assert_eq!(tuple.columns.len(), x.len());
        let mut support = Vec::new();
        for h in 0..rows {
            if x.iter().zip(&tuple.columns).any(|(xc, yc)| xc[h] != yc[h]) {
                support.push(h);
                if support.len() > size_cap {
                    break;
                }
            }
        }
        if support.is_empty() || support.len() > size_cap {
            continue;
        }
        merged
            .entry(support)
            .and_modify(|(w, _)| *w += tuple.weight)
            .or_insert((tuple.weight, tuple.payload));
    }
    let mut vertices: Vec<usize> = merged.keys().flatten().copied().collect();
    vertices.sort_unstable();
    vertices.dedup();
    let edges = merged
        .into_iter()
        .map(|(support, (weight, payload))| HostEdge { support, weight, payload })
        .collect();
    Hypergraph { vertices, edges }
}

/// A candidate pattern: `vertex_count` vertices and a multiset of edges,
/// stored as sorted bitmasks (bit `i` is vertex `i`). Duplicate edges are
/// allowed; the host is a multiset too.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternHypergraph {
    vertex_count: usize,
    edges: Vec<u64>,
}

impl PatternHypergraph {
    pub fn new(vertex_count: usize, mut edges: Vec<u64>) -> Result<Self> {
        if vertex_count == 0 || vertex_count > 63 {
            return Err(Error::InvalidInstance(format!(
                "pattern vertex count must be in 1..=63, got {vertex_count}"
            )));
        }
        let full = (1u64 << vertex_count) - 1;
        if edges.iter().any(|&e| e & !full != 0) {
            return Err(Error::InvalidInstance(
                "pattern edge outside the vertex range".into(),
            ));
        }
        edges.sort_unstable();
        Ok(PatternHypergraph { vertex_count, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[u64] {
        &self.edges
    }

    /// Sufficient certificate that the fractional cover number is at most 4:
    /// every vertex lies in at least `ceil(|edges|/4)` edges. A pattern with
    /// no edges covers nothing and fails.
    pub fn quarter_cover(&self) -> bool {
        if self.edges.is_empty() {
            return false;
        }
        let need = self.edges.len().div_ceil(4);
        (0..self.vertex_count).all(|v| {
            self.edges.iter().filter(|&&e| e >> v & 1 == 1).count() >= need
        })
    }

    /// True when every vertex lies in at least one edge.
    pub fn covers_all_vertices(&self) -> bool {
        let full = (1u64 << self.vertex_count) - 1;
        self.edges.iter().fold(0u64, |acc, e| acc | e) == full
    }

    /// Canonical representative under vertex relabeling: the minimum sorted
    /// edge list over all permutations of the vertices.
    pub fn canonical(&self) -> PatternHypergraph {
        let v = self.vertex_count;
        let mut perm: Vec<usize> = (0..v).collect();
        let mut best: Option<Vec<u64>> = None;
        permute(&mut perm, 0, &mut |p| {
            let mut relabeled: Vec<u64> = self
                .edges
                .iter()
                .map(|&e| {
                    let mut out = 0u64;
                    for (from, &to) in p.iter().enumerate() {
                        if e >> from & 1 == 1 {
                            out |= 1 << to;
                        }
                    }
                    out
                })
                .collect();
            relabeled.sort_unstable();
            if best.as_ref().is_none_or(|b| relabeled < *b) {
                best = Some(relabeled);
            }
        });
        PatternHypergraph { vertex_count: v, edges: best.expect("at least one permutation") }
    }
}

fn permute(perm: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == perm.len() {
        visit(perm);
        return;
    }
    for i in at..perm.len() {
        perm.swap(at, i);
        permute(perm, at + 1, visit);
        perm.swap(at, i);
    }
}

/// All isomorphism-class representatives with exactly `vertices` vertices and
/// exactly `edge_count` edges (multisets of non-empty edges) in which every
/// vertex is covered and the quarter-cover check passes. Output is sorted,
/// so repeated runs yield the identical sequence.
pub fn enumerate_patterns_exact(vertices: usize, edge_count: usize) -> Vec<PatternHypergraph> {
    assert!(vertices >= 1 && vertices <= 20, "pattern enumeration is for small budgets");
    let full = (1u64 << vertices) - 1;
    let mut seen: BTreeSet<PatternHypergraph> = BTreeSet::new();
    let mut edges: Vec<u64> = Vec::with_capacity(edge_count);
    // Non-decreasing sequences over the non-empty subsets enumerate every
    // multiset exactly once.
    fn rec(
        vertices: usize,
        full: u64,
        remaining: usize,
        min_edge: u64,
        edges: &mut Vec<u64>,
        seen: &mut BTreeSet<PatternHypergraph>,
    ) {
        if remaining == 0 {
            let pat = PatternHypergraph { vertex_count: vertices, edges: edges.clone() };
            if pat.covers_all_vertices() && pat.quarter_cover() {
                seen.insert(pat.canonical());
            }
            return;
        }
        for e in min_edge..=full {
            edges.push(e);
            rec(vertices, full, remaining - 1, e, edges, seen);
            edges.pop();
        }
    }
    rec(vertices, full, edge_count, 1, &mut edges, &mut seen);
    seen.into_iter().collect()
}

/// Streams every admissible pattern with `1..=max_vertices` vertices and
/// `1..=edge_budget` edges, deduplicated by canonical form, in a fixed
/// deterministic order.
pub fn enumerate_patterns(max_vertices: usize, edge_budget: usize) -> Vec<PatternHypergraph> {
    let mut out = Vec::new();
    for v in 1..=max_vertices {
        for e in 1..=edge_budget {
            out.extend(enumerate_patterns_exact(v, e));
        }
    }
    out
}

/// Edge budget the solvers deepen to before declaring the pattern search
/// exhausted. For budgets up to 4 a covering witness with one edge per
/// deviating row passes the quarter check, so `budget` edges suffice; beyond
/// that the sampling bound `ceil(200 ln B)` is the hard cap.
pub fn edge_budget_cap(budget: usize) -> usize {
    if budget <= 4 {
        budget
    } else {
        (200.0 * (budget as f64).ln()).ceil() as usize
    }
}

/// Every vertex subset of the host where the pattern appears as a
/// subhypergraph, each reported exactly once, in sorted order.
///
/// Canonical backtracking: pattern vertices are mapped to host vertices one
/// at a time, pruning as soon as some pattern edge can no longer be induced
/// by any host edge restricted to the partial image.
pub fn find_occurrences(pattern: &PatternHypergraph, host: &Hypergraph) -> Vec<Vec<usize>> {
    let pv = pattern.vertex_count;
    let hv = host.vertices();
    if pv > hv.len() {
        return Vec::new();
    }
    let mut image: Vec<usize> = Vec::with_capacity(pv);
    let mut used: Vec<bool> = vec![false; hv.len()];
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();

    fn consistent(
        pattern_edges: &[u64],
        image: &[usize],
        host: &Hypergraph,
        hv: &[usize],
    ) -> bool {
        pattern_edges.iter().all(|&e| {
            host.edges().iter().any(|he| {
                image.iter().enumerate().all(|(pvx, &slot)| {
                    let in_pattern_edge = e >> pvx & 1 == 1;
                    let in_host_edge = he.support.binary_search(&hv[slot]).is_ok();
                    in_pattern_edge == in_host_edge
                })
            })
        })
    }

    fn rec(
        pattern: &PatternHypergraph,
        host: &Hypergraph,
        hv: &[usize],
        image: &mut Vec<usize>,
        used: &mut Vec<bool>,
        found: &mut BTreeSet<Vec<usize>>,
    ) {
        if image.len() == pattern.vertex_count() {
            let mut set: Vec<usize> = image.iter().map(|&slot| hv[slot]).collect();
            set.sort_unstable();
            found.insert(set);
            return;
        }
        for slot in 0..hv.len() {
            if used[slot] {
                continue;
            }
            image.push(slot);
            used[slot] = true;
            if consistent(pattern.edges(), image, host, hv) {
                rec(pattern, host, hv, image, used, found);
            }
            used[slot] = false;
            image.pop();
        }
    }

    rec(pattern, host, hv, &mut image, &mut used, &mut found);
    found.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pat(v: usize, edges: &[&[usize]]) -> PatternHypergraph {
        let masks: Vec<u64> = edges
            .iter()
            .map(|e| e.iter().fold(0u64, |acc, &x| acc | 1 << (x - 1)))
            .collect();
        PatternHypergraph::new(v, masks).unwrap()
    }

    fn host(vertices: &[usize], edges: &[&[usize]]) -> Hypergraph {
        let hedges = edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let mut support: Vec<usize> = e.to_vec();
                support.sort_unstable();
                HostEdge { support, weight: 1, payload: i }
            })
            .collect();
        Hypergraph::new(vertices.to_vec(), hedges).unwrap()
    }

    #[test]
    fn quarter_cover_examples() {
        assert!(pat(1, &[&[1]]).quarter_cover());
        assert!(!pat(2, &[&[1], &[1]]).quarter_cover());
        assert!(pat(2, &[&[1, 2], &[1], &[2], &[1, 2]]).quarter_cover());
        assert!(!PatternHypergraph::new(1, vec![]).unwrap().quarter_cover());
    }

    #[test]
    fn enumerate_single_vertex() {
        let pats = enumerate_patterns(1, 1);
        assert_eq!(pats, vec![pat(1, &[&[1]])]);

        let pats = enumerate_patterns(1, 2);
        assert!(pats.contains(&pat(1, &[&[1]])));
        assert!(pats.contains(&pat(1, &[&[1], &[1]])));
        assert_eq!(pats.len(), 2);
    }

    /// Independent brute force: enumerate all ordered edge sequences, close
    /// each survivor under vertex permutations, and count the orbits.
    fn brute_force_count(max_v: usize, max_e: usize) -> usize {
        let mut orbits: BTreeSet<Vec<u64>> = BTreeSet::new();
        for v in 1..=max_v {
            let full = (1u64 << v) - 1;
            for e in 1..=max_e {
                let mut seq = vec![1u64; e];
                loop {
                    let mut edges = seq.clone();
                    edges.sort_unstable();
                    let p = PatternHypergraph { vertex_count: v, edges };
                    if p.covers_all_vertices() && p.quarter_cover() {
                        // Orbit representative via explicit closure.
                        let mut orbit: BTreeSet<Vec<u64>> = BTreeSet::new();
                        let mut perm: Vec<usize> = (0..v).collect();
                        permute(&mut perm, 0, &mut |pp| {
                            let mut rel: Vec<u64> = p
                                .edges
                                .iter()
                                .map(|&edge| {
                                    let mut out = 0u64;
                                    for (from, &to) in pp.iter().enumerate() {
                                        if edge >> from & 1 == 1 {
                                            out |= 1 << to;
                                        }
                                    }
                                    out
                                })
                                .collect();
                            rel.sort_unstable();
                            orbit.insert(rel);
                        });
                        let mut key = orbit.first().unwrap().clone();
                        key.push(v as u64 << 32);
                        orbits.insert(key);
                    }
                    // Next ordered sequence.
                    let mut i = 0;
                    loop {
                        if i == seq.len() {
                            break;
                        }
                        if seq[i] < full {
                            seq[i] += 1;
                            break;
                        }
                        seq[i] = 1;
                        i += 1;
                    }
                    if i == seq.len() {
                        break;
                    }
                }
            }
        }
        orbits.len()
    }

    #[test]
    fn enumerate_two_vertices_matches_brute_force() {
        // Frozen from the brute-force enumerator: one single-vertex pattern per
        // edge count plus the four two-vertex classes.
        let expected = brute_force_count(2, 2);
        assert_eq!(expected, 6);
        assert_eq!(enumerate_patterns(2, 2).len(), expected);
    }

    #[test]
    fn enumeration_is_deterministic() {
        assert_eq!(enumerate_patterns(3, 3), enumerate_patterns(3, 3));
        for p in enumerate_patterns(3, 3) {
            assert!(p.quarter_cover());
            assert_eq!(p, p.canonical());
        }
    }

    #[test]
    fn no_two_emitted_patterns_isomorphic() {
        let pats = enumerate_patterns(3, 3);
        let canon: BTreeSet<PatternHypergraph> = pats.iter().map(|p| p.canonical()).collect();
        assert_eq!(canon.len(), pats.len());
    }

    #[test]
    fn difference_hypergraph_self_tuple() {
        let x = vec![vec![0, 1], vec![1, 0]];
        let cols: Vec<&[Symbol]> = x.iter().map(|c| c.as_slice()).collect();
        let g = build_difference_hypergraph(
            &x,
            vec![DiffTuple { columns: cols, weight: 1, payload: 0 }],
            4,
        );
        assert!(g.vertices().is_empty());
        assert!(g.edges().is_empty());
    }

    #[test]
    fn difference_hypergraph_single_mismatch() {
        let x = vec![vec![0, 0], vec![1, 1]];
        let y = [vec![0, 1], vec![1, 1]];
        let cols: Vec<&[Symbol]> = y.iter().map(|c| c.as_slice()).collect();
        let g = build_difference_hypergraph(
            &x,
            vec![DiffTuple { columns: cols, weight: 1, payload: 7 }],
            4,
        );
        assert_eq!(g.vertices(), &[1]);
        assert_eq!(g.edges().len(), 1);
        assert_eq!(g.edges()[0].support, vec![1]);
        assert_eq!(g.edges()[0].payload, 7);
    }

    #[test]
    fn difference_hypergraph_cap_drops_large_edges() {
        let x = vec![vec![0, 0, 0, 0]];
        let y = [vec![1, 1, 1, 0]];
        let cols: Vec<&[Symbol]> = y.iter().map(|c| c.as_slice()).collect();
        let g = build_difference_hypergraph(
            &x,
            vec![DiffTuple { columns: cols, weight: 1, payload: 0 }],
            2,
        );
        assert!(g.edges().is_empty());
    }

    #[test]
    fn occurrences_single_vertex_pattern() {
        let g = host(&[1, 2, 3], &[&[1, 2], &[2, 3]]);
        let p = pat(1, &[&[1]]);
        assert_eq!(find_occurrences(&p, &g), vec![vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn occurrences_two_vertex_pattern() {
        let g = host(&[1, 2, 3], &[&[1, 2], &[2, 3]]);
        let p = pat(2, &[&[1], &[1, 2]]);
        assert_eq!(find_occurrences(&p, &g), vec![vec![1, 2], vec![2, 3]]);
    }

    #[test]
    fn occurrences_impossible_pattern() {
        let g = host(&[1, 2, 3], &[&[1, 2, 3]]);
        // Needs a host edge inducing a singleton, but the only edge induces
        // the whole subset for any |V'| >= 2 choice containing it.
        let p = pat(2, &[&[1], &[2]]);
        assert!(find_occurrences(&p, &g).is_empty());
    }

    /// Definition-level checker: all |V'|-subsets, all bijections, all edge
    /// matchings. Kept independent of the backtracking implementation.
    pub(crate) fn naive_occurrences(
        pattern: &PatternHypergraph,
        host: &Hypergraph,
    ) -> Vec<Vec<usize>> {
        let hv = host.vertices();
        let pv = pattern.vertex_count();
        let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut subset: Vec<usize> = Vec::new();
        fn subsets(
            hv: &[usize],
            start: usize,
            need: usize,
            subset: &mut Vec<usize>,
            visit: &mut impl FnMut(&[usize]),
        ) {
            if need == 0 {
                visit(subset);
                return;
            }
            for i in start..hv.len() {
                subset.push(hv[i]);
                subsets(hv, i + 1, need - 1, subset, visit);
                subset.pop();
            }
        }
        subsets(hv, 0, pv, &mut subset, &mut |vs: &[usize]| {
            let mut perm: Vec<usize> = (0..pv).collect();
            let mut hit = false;
            permute(&mut perm, 0, &mut |p| {
                if hit {
                    return;
                }
                // p[i] = pattern vertex assigned to vs[i].
                let ok = pattern.edges().iter().all(|&e| {
                    host.edges().iter().any(|he| {
                        (0..pv).all(|i| {
                            let in_pattern = e >> p[i] & 1 == 1;
                            let in_host = he.support.binary_search(&vs[i]).is_ok();
                            in_pattern == in_host
                        })
                    })
                });
                if ok {
                    hit = true;
                }
            });
            if hit {
                out.insert(vs.to_vec());
            }
        });
        out.into_iter().collect()
    }

    #[test]
    fn occurrences_match_naive_checker_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xCA7C);
        for _ in 0..80 {
            let hv_count = rng.gen_range(1..=8);
            let vertices: Vec<usize> = (1..=hv_count).collect();
            let edge_count = rng.gen_range(1..=5);
            let edges: Vec<Vec<usize>> = (0..edge_count)
                .map(|_| {
                    let mut e: Vec<usize> = vertices
                        .iter()
                        .copied()
                        .filter(|_| rng.gen_bool(0.45))
                        .collect();
                    if e.is_empty() {
                        e.push(vertices[rng.gen_range(0..vertices.len())]);
                    }
                    e
                })
                .collect();
            let edge_refs: Vec<&[usize]> = edges.iter().map(|e| e.as_slice()).collect();
            let g = host(&vertices, &edge_refs);

            let pv = rng.gen_range(1..=3.min(hv_count));
            let full = (1u64 << pv) - 1;
            let pe = rng.gen_range(1..=3);
            let pedges: Vec<u64> = (0..pe).map(|_| rng.gen_range(1..=full)).collect();
            let p = PatternHypergraph::new(pv, pedges).unwrap();

            assert_eq!(find_occurrences(&p, &g), naive_occurrences(&p, &g));
        }
    }
}
