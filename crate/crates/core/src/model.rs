//! Shared data model: alphabets, categorical matrices, relation sets,
//! clustering solutions, and the Hamming geometry they live in.
//!
//! Symbols are dense integers `0..|Σ|-1`; callers with arbitrary categorical
//! labels dictionary-encode them before construction. All indices are
//! 0-based internally (external formats are 1-based and converted at the
//! I/O boundary). Every type here is immutable after construction and safe
//! to share across threads.

use crate::error::{Error, Result};
use std::fmt;

/// A categorical symbol. Alphabets are small (binary data is the common
/// case), so a byte is plenty.
pub type Symbol = u8;

/// The maximum supported alphabet size.
pub const MAX_ALPHABET: usize = 256;

/// A finite alphabet `Σ`, with symbols `0..size-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > MAX_ALPHABET {
            return Err(Error::InvalidInstance(format!(
                "alphabet size must be in 1..={MAX_ALPHABET}, got {size}"
            )));
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, s: Symbol) -> bool {
        (s as usize) < self.size
    }

    /// All symbols in increasing order.
    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + Clone {
        (0..self.size).map(|s| s as Symbol)
    }
}

/// An `m x n` matrix of symbols, stored row-major. Columns are the data
/// points, rows are the features.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CategoricalMatrix {
    alphabet: Alphabet,
    rows: usize,
    cols: usize,
    cells: Vec<Symbol>,
}

impl CategoricalMatrix {
    pub fn new(alphabet: Alphabet, rows: usize, cols: usize, cells: Vec<Symbol>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInstance(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if cells.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} cells for a {rows}x{cols} matrix, got {}",
                rows * cols,
                cells.len()
            )));
        }
        if let Some(&bad) = cells.iter().find(|&&s| !alphabet.contains(s)) {
            return Err(Error::SymbolOutOfRange {
                symbol: bad as usize,
                alphabet: alphabet.size(),
            });
        }
        Ok(CategoricalMatrix { alphabet, rows, cols, cells })
    }

    /// Builds a matrix from column vectors (each of length `rows`).
    pub fn from_columns(alphabet: Alphabet, columns: &[Vec<Symbol>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch(
                "columns of unequal length".to_string(),
            ));
        }
        let mut cells = vec![0; rows * cols];
        for (j, col) in columns.iter().enumerate() {
            for (i, &s) in col.iter().enumerate() {
                cells[i * cols + j] = s;
            }
        }
        CategoricalMatrix::new(alphabet, rows, cols, cells)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Number of rows `m`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns `n`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Symbol {
        debug_assert!(row < self.rows && col < self.cols);
        self.cells[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[Symbol] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<Symbol> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Symbol>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }
}

impl fmt::Display for CategoricalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|s| s.to_string()).collect();
            writeln!(f, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Per-row sets of allowed k-tuples constraining the cluster centers.
/// Tuples within each relation are kept sorted and deduplicated, so "the
/// canonically smallest element" is simply the first one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSet {
    arity: usize,
    relations: Vec<Vec<Vec<Symbol>>>,
}

impl RelationSet {
    pub fn new(arity: usize, mut relations: Vec<Vec<Vec<Symbol>>>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidInstance("relation arity must be >= 1".into()));
        }
        for (row, rel) in relations.iter_mut().enumerate() {
            if rel.is_empty() {
                return Err(Error::EmptyRelation { row: row + 1 });
            }
            for tuple in rel.iter() {
                if tuple.len() != arity {
                    return Err(Error::ArityMismatch { expected: arity, got: tuple.len() });
                }
            }
            rel.sort();
            rel.dedup();
        }
        Ok(RelationSet { arity, relations })
    }

    /// The full relation `Σ^k` for every row; used when centers are
    /// unconstrained.
    pub fn full(alphabet: Alphabet, arity: usize, rows: usize) -> Result<Self> {
        let mut all = vec![Vec::new()];
        for _ in 0..arity {
            let mut next = Vec::with_capacity(all.len() * alphabet.size());
            for prefix in &all {
                for s in alphabet.symbols() {
                    let mut t: Vec<Symbol> = prefix.clone();
                    t.push(s);
                    next.push(t);
                }
            }
            all = next;
        }
        RelationSet::new(arity, vec![all; rows])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// The sorted tuples allowed at `row`.
    pub fn row(&self, row: usize) -> &[Vec<Symbol>] {
        &self.relations[row]
    }

    pub fn contains(&self, row: usize, tuple: &[Symbol]) -> bool {
        self.relations[row].binary_search_by(|t| t.as_slice().cmp(tuple)).is_ok()
    }

    pub fn max_relation_size(&self) -> usize {
        self.relations.iter().map(|r| r.len()).max().unwrap_or(0)
    }
}

/// A clustering of matrix columns: outlier columns `O`, at most `k` disjoint
/// clusters (empty clusters permitted), one center per cluster slot, and the
/// total Hamming cost. All index sets are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusteringSolution {
    pub outliers: Vec<usize>,
    pub clusters: Vec<Vec<usize>>,
    pub centers: Vec<Vec<Symbol>>,
    pub cost: u64,
}

impl ClusteringSolution {
    /// A total order used for deterministic tie-breaking between solutions of
    /// equal cost: centers first (the solver contract is "lexicographically
    /// smallest center tuple"), then outliers, then clusters.
    pub fn tie_key(&self) -> (Vec<Symbol>, &Vec<usize>, &Vec<Vec<usize>>) {
        let centers_flat: Vec<Symbol> = self.centers.iter().flatten().copied().collect();
        (centers_flat, &self.outliers, &self.clusters)
    }
}

/// A feature-selection answer: removed rows, clusters of the data columns,
/// and centers over the kept rows in original row order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSelectionSolution {
    pub removed_features: Vec<usize>,
    pub point_clusters: Vec<Vec<usize>>,
    pub centers: Vec<Vec<Symbol>>,
    pub cost: u64,
}

/// Hamming distance between two symbol vectors of equal length.
///
/// Panics if the lengths differ; that is a caller bug, not a data error.
pub fn hamming(x: &[Symbol], y: &[Symbol]) -> usize {
    assert_eq!(x.len(), y.len(), "hamming: vectors of unequal length");
    x.iter().zip(y).filter(|(a, b)| a != b).count()
}

/// Transposed copy of a matrix.
pub fn transpose(matrix: &CategoricalMatrix) -> CategoricalMatrix {
    let (m, n) = (matrix.rows(), matrix.cols());
    let mut cells = vec![0; m * n];
    for i in 0..m {
        for j in 0..n {
            cells[j * m + i] = matrix.get(i, j);
        }
    }
    CategoricalMatrix::new(matrix.alphabet(), n, m, cells)
        .expect("transpose of a valid matrix is valid")
}

/// Total clustering cost `Σ_i Σ_{j in I_i} d_H(a^j, c_i)`. Outlier columns
/// contribute nothing.
pub fn solution_cost(matrix: &CategoricalMatrix, solution: &ClusteringSolution) -> Result<u64> {
    if solution.centers.len() != solution.clusters.len() {
        return Err(Error::InvalidSolution(format!(
            "{} clusters but {} centers",
            solution.clusters.len(),
            solution.centers.len()
        )));
    }
    let mut total: u64 = 0;
    for (members, center) in solution.clusters.iter().zip(&solution.centers) {
        if center.len() != matrix.rows() {
            return Err(Error::InvalidSolution(format!(
                "center length {} does not match row count {}",
                center.len(),
                matrix.rows()
            )));
        }
        for &j in members {
            if j >= matrix.cols() {
                return Err(Error::InvalidSolution(format!(
                    "column index {j} out of range for {} columns",
                    matrix.cols()
                )));
            }
            total += hamming(&matrix.column(j), center) as u64;
        }
    }
    for &j in &solution.outliers {
        if j >= matrix.cols() {
            return Err(Error::InvalidSolution(format!(
                "outlier index {j} out of range for {} columns",
                matrix.cols()
            )));
        }
    }
    Ok(total)
}

/// The first condition a solution violates, if any. Failure is a value, not
/// an error: callers probing deliberately bad solutions match on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyFailure {
    TooManyOutliers { got: usize, cap: usize },
    NotPartition(String),
    WrongCenterCount { got: usize, expected: usize },
    CenterLength { got: usize, expected: usize },
    RelationViolated { row: usize },
    CostMismatch { stored: u64, actual: u64 },
    CostExceedsBudget { cost: u64, budget: u64 },
    Malformed(String),
}

impl fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyFailure::TooManyOutliers { got, cap } => {
                write!(f, "too many outliers: {got} > {cap}")
            }
            VerifyFailure::NotPartition(msg) => write!(f, "not a partition: {msg}"),
            VerifyFailure::WrongCenterCount { got, expected } => {
                write!(f, "wrong center count: {got} != {expected}")
            }
            VerifyFailure::CenterLength { got, expected } => {
                write!(f, "center length {got} != row count {expected}")
            }
            VerifyFailure::RelationViolated { row } => {
                write!(f, "relation violated at row {}", row + 1)
            }
            VerifyFailure::CostMismatch { stored, actual } => {
                write!(f, "stored cost {stored} != recomputed cost {actual}")
            }
            VerifyFailure::CostExceedsBudget { cost, budget } => {
                write!(f, "cost {cost} exceeds budget {budget}")
            }
            VerifyFailure::Malformed(msg) => write!(f, "malformed solution: {msg}"),
        }
    }
}

/// Checks that outliers and clusters partition the column set exactly.
pub(crate) fn check_partition(
    n: usize,
    outliers: &[usize],
    clusters: &[Vec<usize>],
) -> std::result::Result<(), VerifyFailure> {
    let mut seen = vec![false; n];
    let mut count = 0usize;
    let mut mark = |j: usize| -> std::result::Result<(), VerifyFailure> {
        if j >= n {
            return Err(VerifyFailure::NotPartition(format!(
                "column index {} out of range",
                j + 1
            )));
        }
        if seen[j] {
            return Err(VerifyFailure::NotPartition(format!(
                "column {} assigned twice",
                j + 1
            )));
        }
        seen[j] = true;
        count += 1;
        Ok(())
    };
    for &j in outliers {
        mark(j)?;
    }
    for cluster in clusters {
        for &j in cluster {
            mark(j)?;
        }
    }
    if count != n {
        return Err(VerifyFailure::NotPartition(format!(
            "{count} of {n} columns covered"
        )));
    }
    Ok(())
}

/// Verifies the full constrained-clustering decision predicate: outlier cap,
/// exact partition, centers satisfying every row relation, stored cost
/// consistent and within budget.
pub fn verify_constrained(
    matrix: &CategoricalMatrix,
    relations: &RelationSet,
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
    let k = relations.arity();
    if solution.centers.len() != k {
        return Err(VerifyFailure::WrongCenterCount { got: solution.centers.len(), expected: k });
    }
    if solution.clusters.len() != k {
        return Err(VerifyFailure::WrongCenterCount {
            got: solution.clusters.len(),
            expected: k,
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
    if relations.len() != matrix.rows() {
        return Err(VerifyFailure::Malformed(format!(
            "{} relations for {} rows",
            relations.len(),
            matrix.rows()
        )));
    }
    let mut tuple = vec![0 as Symbol; k];
    for row in 0..matrix.rows() {
        for (t, center) in tuple.iter_mut().zip(&solution.centers) {
            *t = center[row];
        }
        if !relations.contains(row, &tuple) {
            return Err(VerifyFailure::RelationViolated { row });
        }
    }
    let actual = solution_cost(matrix, solution)
        .map_err(|e| VerifyFailure::Malformed(e.to_string()))?;
    if actual != solution.cost {
        return Err(VerifyFailure::CostMismatch { stored: solution.cost, actual });
    }
    if actual > budget {
        return Err(VerifyFailure::CostExceedsBudget { cost: actual, budget });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn alphabet(n: usize) -> Alphabet {
        Alphabet::new(n).unwrap()
    }

    /// The 4x5 toy matrix used across the solver tests, columns
    /// (0,0,0,0),(0,0,0,1),(1,1,0,0),(1,1,0,1),(1,0,1,0).
    pub(crate) fn toy_matrix() -> CategoricalMatrix {
        CategoricalMatrix::from_columns(
            alphabet(2),
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
    fn hamming_basics() {
        assert_eq!(hamming(&[0, 1, 1, 0], &[0, 1, 1, 0]), 0);
        assert_eq!(hamming(&[0, 0, 0], &[1, 1, 1]), 3);
        assert_eq!(hamming(&[1, 0, 0, 1, 0], &[1, 1, 0, 0, 0]), 2);
    }

    #[test]
    #[should_panic(expected = "unequal length")]
    fn hamming_length_mismatch_panics() {
        hamming(&[0, 1], &[0, 1, 2]);
    }

    #[test]
    fn transpose_by_definition() {
        let m = CategoricalMatrix::new(alphabet(3), 2, 3, vec![0, 1, 2, 2, 0, 1]).unwrap();
        let t = transpose(&m);
        assert_eq!(t.rows(), 3);
        assert_eq!(t.cols(), 2);
        assert_eq!(t.row(0), &[0, 2]);
        assert_eq!(t.row(1), &[1, 0]);
        assert_eq!(t.row(2), &[2, 1]);
    }

    #[test]
    fn transpose_one_by_one() {
        let m = CategoricalMatrix::new(alphabet(2), 1, 1, vec![1]).unwrap();
        assert_eq!(transpose(&m), m);
    }

    #[test]
    fn solution_cost_identical_columns() {
        let m = CategoricalMatrix::from_columns(
            alphabet(2),
            &[vec![1, 0, 1], vec![1, 0, 1], vec![1, 0, 1]],
        )
        .unwrap();
        let sol = ClusteringSolution {
            outliers: vec![],
            clusters: vec![vec![0, 1, 2]],
            centers: vec![vec![1, 0, 1]],
            cost: 0,
        };
        assert_eq!(solution_cost(&m, &sol).unwrap(), 0);
    }

    #[test]
    fn solution_cost_toy_matrix() {
        let m = toy_matrix();
        let sol = ClusteringSolution {
            outliers: vec![4],
            clusters: vec![vec![0, 1], vec![2, 3]],
            centers: vec![vec![0, 0, 0, 0], vec![1, 1, 0, 0]],
            cost: 2,
        };
        assert_eq!(solution_cost(&m, &sol).unwrap(), 2);
    }

    #[test]
    fn solution_cost_rejects_bad_center_length() {
        let m = toy_matrix();
        let sol = ClusteringSolution {
            outliers: vec![],
            clusters: vec![vec![0, 1, 2, 3, 4]],
            centers: vec![vec![0, 0]],
            cost: 0,
        };
        assert!(matches!(solution_cost(&m, &sol), Err(Error::InvalidSolution(_))));
    }

    /// Figure-style zero-cost check: the C5 incidence matrix restricted to
    /// rows {b, d}, clusters {ab,bc},{cd,de},{ae} with centers
    /// (1,0),(0,1),(0,0), evaluated through the row-restricted view.
    #[test]
    fn solution_cost_c5_row_restricted_view() {
        // Rows b and d of the C5 incidence matrix; columns ab,bc,cd,de,ae.
        let kept = CategoricalMatrix::new(alphabet(2), 2, 5, vec![1, 1, 0, 0, 0, 0, 0, 1, 1, 0])
            .unwrap();
        let sol = ClusteringSolution {
            outliers: vec![],
            clusters: vec![vec![0, 1], vec![2, 3], vec![4]],
            centers: vec![vec![1, 0], vec![0, 1], vec![0, 0]],
            cost: 0,
        };
        assert_eq!(solution_cost(&kept, &sol).unwrap(), 0);
    }

    fn small_instance() -> (CategoricalMatrix, RelationSet) {
        let m = toy_matrix();
        let rels = RelationSet::full(m.alphabet(), 2, m.rows()).unwrap();
        (m, rels)
    }

    fn valid_solution() -> ClusteringSolution {
        ClusteringSolution {
            outliers: vec![4],
            clusters: vec![vec![0, 1], vec![2, 3]],
            centers: vec![vec![0, 0, 0, 0], vec![1, 1, 0, 0]],
            cost: 2,
        }
    }

    #[test]
    fn verify_accepts_valid_solution() {
        let (m, rels) = small_instance();
        assert_eq!(verify_constrained(&m, &rels, 2, 1, &valid_solution()), Ok(()));
    }

    #[test]
    fn verify_flags_relation_violation() {
        let m = toy_matrix();
        // Only (0,1) is allowed anywhere, so center pair columns must read (0,1) at
        // every row; the valid centers violate row 0.
        let rels = RelationSet::new(2, vec![vec![vec![0, 1]]; 4]).unwrap();
        let sol = valid_solution();
        assert_eq!(
            verify_constrained(&m, &rels, 2, 1, &sol),
            Err(VerifyFailure::RelationViolated { row: 0 })
        );
    }

    #[test]
    fn verify_flags_too_many_outliers() {
        let (m, rels) = small_instance();
        let mut sol = valid_solution();
        sol.outliers = vec![3, 4];
        sol.clusters = vec![vec![0, 1], vec![2]];
        sol.cost = 1;
        assert_eq!(
            verify_constrained(&m, &rels, 2, 1, &sol),
            Err(VerifyFailure::TooManyOutliers { got: 2, cap: 1 })
        );
    }

    #[test]
    fn verify_mutations_flip() {
        let (m, rels) = small_instance();
        // Perturb each field of an accepted solution and expect a failure.
        let mut sol = valid_solution();
        sol.cost = 1;
        assert!(verify_constrained(&m, &rels, 2, 1, &sol).is_err());

        let mut sol = valid_solution();
        sol.centers[0][0] = 1;
        assert!(verify_constrained(&m, &rels, 2, 1, &sol).is_err());

        let mut sol = valid_solution();
        sol.outliers = vec![];
        assert!(verify_constrained(&m, &rels, 2, 1, &sol).is_err());

        let mut sol = valid_solution();
        sol.clusters[0] = vec![0];
        assert!(verify_constrained(&m, &rels, 2, 1, &sol).is_err());
    }

    #[test]
    fn empty_relation_rejected() {
        let err = RelationSet::new(2, vec![vec![vec![0, 0]], vec![]]);
        assert_eq!(err.unwrap_err(), Error::EmptyRelation { row: 2 });
    }

    #[test]
    fn relation_arity_checked() {
        let err = RelationSet::new(2, vec![vec![vec![0, 0, 1]]]);
        assert_eq!(err.unwrap_err(), Error::ArityMismatch { expected: 2, got: 3 });
    }

    proptest! {
        #[test]
        fn hamming_is_a_metric(len in 1usize..12, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut v = || (0..len).map(|_| rng.gen_range(0..3) as Symbol).collect::<Vec<_>>();
            let (x, y, z) = (v(), v(), v());
            prop_assert_eq!(hamming(&x, &x), 0);
            prop_assert_eq!(hamming(&x, &y), hamming(&y, &x));
            prop_assert!(hamming(&x, &z) <= hamming(&x, &y) + hamming(&y, &z));
        }

        #[test]
        fn transpose_involution(rows in 1usize..7, cols in 1usize..7, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let cells: Vec<Symbol> = (0..rows * cols).map(|_| rng.gen_range(0..4)).collect();
            let m = CategoricalMatrix::new(Alphabet::new(4).unwrap(), rows, cols, cells).unwrap();
            let t = transpose(&m);
            prop_assert_eq!(t.rows(), cols);
            prop_assert_eq!(t.cols(), rows);
            let mut orig = m.cells().to_vec();
            let mut flipped = t.cells().to_vec();
            orig.sort_unstable();
            flipped.sort_unstable();
            prop_assert_eq!(orig, flipped);
            prop_assert_eq!(transpose(&t), m);
        }
    }
}
