//! Sparse binary parity-check matrices and syndrome arithmetic.
//!
//! A [`ParityCheckMatrix`] stores the Tanner graph of an `m x n` code in two
//! compressed adjacency tables: row-major (check to variables) and
//! column-major (variable to checks). Edges are numbered in row-major order;
//! the column table also records the edge id of every entry so message-passing
//! decoders can address per-edge storage from either side.

pub mod alist;
pub mod peg;

use std::fmt;

use thiserror::Error;

pub use peg::COLUMN_DEGREE;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("length mismatch: expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Alist(#[from] alist::ParseError),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Sparse `m x n` binary matrix viewed as a Tanner graph.
#[derive(Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n_cols: usize,
    n_rows: usize,
    row_ptr: Vec<usize>,
    row_vars: Vec<u32>,
    col_ptr: Vec<usize>,
    col_checks: Vec<u32>,
    col_edges: Vec<u32>,
}

impl fmt::Debug for ParityCheckMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParityCheckMatrix")
            .field("n_cols", &self.n_cols)
            .field("n_rows", &self.n_rows)
            .field("edges", &self.row_vars.len())
            .finish()
    }
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-row variable lists (0-based).
    ///
    /// Rows are sorted on the way in. Duplicate or out-of-range entries and
    /// empty rows or columns are rejected.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let n_rows = rows.len();
        if n_cols == 0 || n_rows == 0 {
            return Err(Error::Param("matrix must have at least one row and one column".into()));
        }
        if n_cols > u32::MAX as usize || n_rows > u32::MAX as usize {
            return Err(Error::Param("matrix dimensions exceed u32 index range".into()));
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut row_vars = Vec::new();
        let mut col_deg = vec![0usize; n_cols];
        row_ptr.push(0);
        for (j, mut row) in rows.into_iter().enumerate() {
            if row.is_empty() {
                return Err(Error::Param(format!("row {j} is empty")));
            }
            row.sort_unstable();
            for w in row.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::Param(format!("row {j} lists column {} twice", w[0])));
                }
            }
            for &i in &row {
                if i >= n_cols {
                    return Err(Error::Param(format!("row {j} references column {i} >= {n_cols}")));
                }
                col_deg[i] += 1;
                row_vars.push(i as u32);
            }
            row_ptr.push(row_vars.len());
        }
        if let Some(i) = col_deg.iter().position(|&d| d == 0) {
            return Err(Error::Param(format!("column {i} is empty")));
        }

        let mut col_ptr = Vec::with_capacity(n_cols + 1);
        col_ptr.push(0);
        for d in &col_deg {
            col_ptr.push(col_ptr.last().unwrap() + d);
        }
        let mut fill = col_ptr[..n_cols].to_vec();
        let mut col_checks = vec![0u32; row_vars.len()];
        let mut col_edges = vec![0u32; row_vars.len()];
        // Rows are visited in ascending order, so each column list comes out sorted.
        for j in 0..n_rows {
            for (e, &v) in (row_ptr[j]..).zip(&row_vars[row_ptr[j]..row_ptr[j + 1]]) {
                let i = v as usize;
                col_checks[fill[i]] = j as u32;
                col_edges[fill[i]] = e as u32;
                fill[i] += 1;
            }
        }
        Ok(Self {
            n_cols,
            n_rows,
            row_ptr,
            row_vars,
            col_ptr,
            col_checks,
            col_edges,
        })
    }

    /// Code length `n`.
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of checks `m`.
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Design rate `1 - m/n`.
    pub fn rate(&self) -> f64 {
        1.0 - self.n_rows as f64 / self.n_cols as f64
    }

    pub fn n_edges(&self) -> usize {
        self.row_vars.len()
    }

    /// Variables attached to check `j`, ascending.
    pub fn row(&self, j: usize) -> &[u32] {
        &self.row_vars[self.row_ptr[j]..self.row_ptr[j + 1]]
    }

    /// Row-major edge ids of check `j`.
    pub fn row_edge_range(&self, j: usize) -> std::ops::Range<usize> {
        self.row_ptr[j]..self.row_ptr[j + 1]
    }

    /// Checks attached to variable `i`, ascending.
    pub fn col(&self, i: usize) -> &[u32] {
        &self.col_checks[self.col_ptr[i]..self.col_ptr[i + 1]]
    }

    /// Row-major edge ids of variable `i`, in the same order as [`Self::col`].
    pub fn col_edges(&self, i: usize) -> &[u32] {
        &self.col_edges[self.col_ptr[i]..self.col_ptr[i + 1]]
    }

    /// Variable index of every edge, in edge-id order.
    pub fn edge_vars(&self) -> &[u32] {
        &self.row_vars
    }

    pub fn row_degree(&self, j: usize) -> usize {
        self.row_ptr[j + 1] - self.row_ptr[j]
    }

    pub fn col_degree(&self, i: usize) -> usize {
        self.col_ptr[i + 1] - self.col_ptr[i]
    }

    pub fn max_row_degree(&self) -> usize {
        (0..self.n_rows).map(|j| self.row_degree(j)).max().unwrap_or(0)
    }

    pub fn max_col_degree(&self) -> usize {
        (0..self.n_cols).map(|i| self.col_degree(i)).max().unwrap_or(0)
    }

    pub fn mean_row_degree(&self) -> f64 {
        self.n_edges() as f64 / self.n_rows as f64
    }

    /// All `(check, variable)` pairs in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_rows).flat_map(move |j| self.row(j).iter().map(move |&i| (j, i as usize)))
    }

    /// Checks the column table against the row table.
    ///
    /// Always true for matrices built through this module; exposed so tests and
    /// fuzz targets can assert it on anything they produce.
    pub fn is_transpose_consistent(&self) -> bool {
        let mut seen = 0usize;
        for i in 0..self.n_cols {
            let checks = self.col(i);
            if checks.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            for (&j, &e) in checks.iter().zip(self.col_edges(i)) {
                let e = e as usize;
                if !self.row_edge_range(j as usize).contains(&e) || self.row_vars[e] as usize != i {
                    return false;
                }
                seen += 1;
            }
        }
        seen == self.n_edges()
    }

    /// Number of checks whose parity over `word` differs from `syndrome`.
    pub fn count_unsatisfied(&self, word: &[u8], syndrome: &Syndrome) -> usize {
        (0..self.n_rows)
            .filter(|&j| self.row_parity(j, word) != syndrome.0[j])
            .count()
    }

    #[inline]
    fn row_parity(&self, j: usize, word: &[u8]) -> u8 {
        self.row(j).iter().fold(0u8, |acc, &i| acc ^ word[i as usize]) & 1
    }
}

/// Computes `H x^T mod 2`.
pub fn syndrome(h: &ParityCheckMatrix, x: &[u8]) -> Result<Syndrome> {
    if x.len() != h.n_cols {
        return Err(Error::LengthMismatch {
            expected: h.n_cols,
            got: x.len(),
        });
    }
    Ok(Syndrome((0..h.n_rows).map(|j| h.row_parity(j, x)).collect()))
}

/// Length-`m` syndrome bits, one `u8` per bit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Syndrome(pub Vec<u8>);

impl Syndrome {
    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `N >= 1` parity-check matrices sharing `n` and `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixSet {
    matrices: Vec<ParityCheckMatrix>,
    seed: u64,
}

impl MatrixSet {
    /// Wraps existing matrices. All must share dimensions; with more than one
    /// matrix, members must be pairwise distinct.
    pub fn new(matrices: Vec<ParityCheckMatrix>, seed: u64) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::Param("a matrix set needs at least one matrix".into()))?;
        let (n, m) = (first.n_cols, first.n_rows);
        for (k, h) in matrices.iter().enumerate() {
            if h.n_cols != n || h.n_rows != m {
                return Err(Error::Param(format!(
                    "matrix {k} is {}x{}, expected {m}x{n}",
                    h.n_rows, h.n_cols
                )));
            }
        }
        for a in 0..matrices.len() {
            for b in a + 1..matrices.len() {
                if matrices[a] == matrices[b] {
                    return Err(Error::Param(format!("matrices {a} and {b} are identical")));
                }
            }
        }
        Ok(Self { matrices, seed })
    }

    /// Builds `count` PEG matrices of the given rate from independent seeds
    /// derived from `seed`.
    pub fn construct(n: usize, rate: f64, count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Param("matrix count must be at least 1".into()));
        }
        let m = check_count(n, rate)?;
        let mut matrices: Vec<ParityCheckMatrix> = Vec::with_capacity(count);
        for k in 0..count {
            let mut attempt = 0u64;
            let h = loop {
                let mut rng = crate::seed::rng(seed, &[crate::seed::label("peg"), k as u64, attempt]);
                let h = peg::build(n, m, COLUMN_DEGREE, &mut rng)?;
                if !matrices.contains(&h) {
                    break h;
                }
                // Only reachable for tiny codes with few distinct PEG outcomes.
                attempt += 1;
                if attempt > 64 {
                    return Err(Error::Param(format!(
                        "could not build {count} distinct {m}x{n} matrices"
                    )));
                }
            };
            matrices.push(h);
        }
        Ok(Self { matrices, seed })
    }

    /// Takes member `k` as a single-matrix set.
    pub fn single(&self, k: usize) -> MatrixSet {
        MatrixSet {
            matrices: vec![self.matrices[k].clone()],
            seed: self.seed,
        }
    }

    pub fn matrices(&self) -> &[ParityCheckMatrix] {
        &self.matrices
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_cols(&self) -> usize {
        self.matrices[0].n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.matrices[0].n_rows
    }

    pub fn rate(&self) -> f64 {
        self.matrices[0].rate()
    }

    /// One syndrome per member matrix.
    pub fn syndromes(&self, x: &[u8]) -> Result<Vec<Syndrome>> {
        self.matrices.iter().map(|h| syndrome(h, x)).collect()
    }
}

/// Check count `m = n (1 - rate)`, which must be a positive integer below `n`.
pub fn check_count(n: usize, rate: f64) -> Result<usize> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Param(format!("rate {rate} outside (0, 1)")));
    }
    let m_exact = n as f64 * (1.0 - rate);
    let m = m_exact.round();
    if (m_exact - m).abs() > 1e-6 * m_exact.max(1.0) {
        return Err(Error::Param(format!("n (1 - rate) = {m_exact} is not an integer")));
    }
    let m = m as usize;
    if m == 0 || m >= n {
        return Err(Error::Param(format!("check count {m} invalid for n = {n}")));
    }
    if m < COLUMN_DEGREE {
        return Err(Error::Param(format!(
            "check count {m} below the column degree {COLUMN_DEGREE}"
        )));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> ParityCheckMatrix {
        ParityCheckMatrix::from_rows(3, vec![vec![0, 1], vec![1, 2]]).unwrap()
    }

    fn dense_syndrome(rows: &[Vec<usize>], x: &[u8]) -> Vec<u8> {
        rows.iter()
            .map(|r| (0..x.len()).filter(|i| r.contains(i)).map(|i| x[i]).sum::<u8>() % 2)
            .collect()
    }

    #[test]
    fn toy_syndrome() {
        assert_eq!(syndrome(&toy(), &[1, 0, 1]).unwrap().0, vec![1, 1]);
        assert_eq!(syndrome(&toy(), &[0, 0, 0]).unwrap().0, vec![0, 0]);
    }

    #[test]
    fn syndrome_length_mismatch() {
        assert_eq!(
            syndrome(&toy(), &[1, 0]),
            Err(Error::LengthMismatch { expected: 3, got: 2 })
        );
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(ParityCheckMatrix::from_rows(3, vec![vec![0, 0, 1], vec![2]]).is_err());
        assert!(ParityCheckMatrix::from_rows(3, vec![vec![0, 3], vec![1, 2]]).is_err());
        assert!(ParityCheckMatrix::from_rows(3, vec![vec![0, 1], vec![]]).is_err());
        // column 2 never used
        assert!(ParityCheckMatrix::from_rows(3, vec![vec![0, 1], vec![1]]).is_err());
    }

    #[test]
    fn adjacency_is_transposed() {
        let h = toy();
        assert_eq!(h.col(0), &[0]);
        assert_eq!(h.col(1), &[0, 1]);
        assert_eq!(h.col(2), &[1]);
        assert_eq!(h.col_edges(1), &[1, 2]);
        assert!(h.is_transpose_consistent());
    }

    #[test]
    fn construct_small() {
        let set = MatrixSet::construct(10, 0.6, 1, 7).unwrap();
        let h = &set.matrices()[0];
        assert_eq!((h.n_rows(), h.n_cols()), (4, 10));
        assert!((0..10).all(|i| h.col_degree(i) == 3));
        assert!((0..4).all(|j| h.row_degree(j) >= 1));
        assert!(h.is_transpose_consistent());
    }

    #[test]
    fn construct_rejects_bad_rates() {
        assert!(matches!(MatrixSet::construct(10, 1.5, 1, 0), Err(Error::Param(_))));
        assert!(matches!(MatrixSet::construct(5000, 1.0, 1, 0), Err(Error::Param(_))));
        assert!(matches!(MatrixSet::construct(10, 0.55, 1, 0), Err(Error::Param(_))));
        assert!(matches!(MatrixSet::construct(10, 0.6, 0, 0), Err(Error::Param(_))));
        assert!(check_count(5000, 0.95).is_ok());
    }

    #[test]
    fn construct_is_deterministic_and_distinct() {
        let a = MatrixSet::construct(200, 0.7, 3, 11).unwrap();
        let b = MatrixSet::construct(200, 0.7, 3, 11).unwrap();
        assert_eq!(a, b);
        let m = a.matrices();
        assert!(m[0] != m[1] && m[1] != m[2] && m[0] != m[2]);
    }

    #[test]
    fn matrix_set_rejects_mixed_shapes() {
        let a = toy();
        let b = ParityCheckMatrix::from_rows(3, vec![vec![0, 1, 2]]).unwrap();
        assert!(MatrixSet::new(vec![a.clone(), b], 0).is_err());
        assert!(MatrixSet::new(vec![a.clone(), a], 0).is_err());
        assert!(MatrixSet::new(vec![], 0).is_err());
    }

    proptest! {
        #[test]
        fn syndrome_matches_dense_and_is_linear(
            rows in proptest::collection::vec(proptest::collection::btree_set(0usize..6, 1..4), 3),
            x in proptest::collection::vec(0u8..2, 6),
            y in proptest::collection::vec(0u8..2, 6),
        ) {
            let rows: Vec<Vec<usize>> = rows.into_iter().map(|r| r.into_iter().collect()).collect();
            let Ok(h) = ParityCheckMatrix::from_rows(6, rows.clone()) else { return Ok(()); };
            let sx = syndrome(&h, &x).unwrap();
            prop_assert_eq!(&sx.0, &dense_syndrome(&rows, &x));
            let xy: Vec<u8> = x.iter().zip(&y).map(|(a, b)| a ^ b).collect();
            let sy = syndrome(&h, &y).unwrap();
            let sxy = syndrome(&h, &xy).unwrap();
            let sum: Vec<u8> = sx.0.iter().zip(&sy.0).map(|(a, b)| a ^ b).collect();
            prop_assert_eq!(sxy.0, sum);
        }
    }
}
