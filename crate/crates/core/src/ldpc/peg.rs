//! Progressive edge growth with a regular column degree.
//!
//! Columns are processed left to right. The first edge of a column goes to a
//! lowest-degree check; every further edge goes to a lowest-degree check among
//! those farthest from the column in the graph built so far (or unreachable
//! from it), which avoids short cycles whenever the greedy placement allows.
//! Ties are broken uniformly at random.

use rand::Rng as _;

use super::{Error, ParityCheckMatrix, Result};
use crate::seed::Rng;

/// Column degree used by [`super::MatrixSet::construct`].
pub const COLUMN_DEGREE: usize = 3;

struct Graph {
    check_vars: Vec<Vec<u32>>,
    var_checks: Vec<Vec<u32>>,
    check_mark: Vec<u32>,
    var_mark: Vec<u32>,
    epoch: u32,
}

impl Graph {
    fn new(n: usize, m: usize) -> Self {
        Self {
            check_vars: vec![Vec::new(); m],
            var_checks: vec![Vec::new(); n],
            check_mark: vec![0; m],
            var_mark: vec![0; n],
            epoch: 0,
        }
    }

    /// Checks eligible for the next edge of `v`: the deepest BFS layer when the
    /// tree from `v` spans every check, else every check the tree never reaches.
    fn candidates(&mut self, v: usize, out: &mut Vec<u32>) {
        out.clear();
        let m = self.check_vars.len();
        self.epoch += 1;
        let epoch = self.epoch;
        self.var_mark[v] = epoch;
        let mut frontier: Vec<u32> = self.var_checks[v].clone();
        for &c in &frontier {
            self.check_mark[c as usize] = epoch;
        }
        let mut reached = frontier.len();
        let mut next = Vec::new();
        loop {
            next.clear();
            for &c in &frontier {
                for &u in &self.check_vars[c as usize] {
                    if self.var_mark[u as usize] == epoch {
                        continue;
                    }
                    self.var_mark[u as usize] = epoch;
                    for &c2 in &self.var_checks[u as usize] {
                        if self.check_mark[c2 as usize] != epoch {
                            self.check_mark[c2 as usize] = epoch;
                            next.push(c2);
                        }
                    }
                }
            }
            if next.is_empty() {
                out.extend((0..m as u32).filter(|&c| self.check_mark[c as usize] != epoch));
                return;
            }
            reached += next.len();
            if reached == m {
                out.extend_from_slice(&next);
                return;
            }
            std::mem::swap(&mut frontier, &mut next);
        }
    }

    fn connect(&mut self, v: usize, c: usize) {
        self.var_checks[v].push(c as u32);
        self.check_vars[c].push(v as u32);
    }
}

/// Builds an `m x n` matrix with every column of weight `col_degree`.
pub fn build(n: usize, m: usize, col_degree: usize, rng: &mut Rng) -> Result<ParityCheckMatrix> {
    if col_degree == 0 || col_degree > m {
        return Err(Error::Param(format!(
            "column degree {col_degree} impossible with {m} checks"
        )));
    }
    let mut g = Graph::new(n, m);
    let mut cand = Vec::with_capacity(m);
    let mut lowest = Vec::with_capacity(m);
    for v in 0..n {
        for d in 0..col_degree {
            if d == 0 {
                cand.clear();
                cand.extend(0..m as u32);
            } else {
                g.candidates(v, &mut cand);
            }
            let min_deg = cand
                .iter()
                .map(|&c| g.check_vars[c as usize].len())
                .min()
                .expect("candidate set is never empty while col_degree <= m");
            lowest.clear();
            lowest.extend(cand.iter().copied().filter(|&c| g.check_vars[c as usize].len() == min_deg));
            lowest.sort_unstable();
            let c = lowest[rng.gen_range(0..lowest.len())];
            g.connect(v, c as usize);
        }
    }
    let rows = g
        .check_vars
        .into_iter()
        .map(|r| r.into_iter().map(|v| v as usize).collect())
        .collect();
    ParityCheckMatrix::from_rows(n, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn has_four_cycle(h: &ParityCheckMatrix) -> bool {
        for i in 0..h.n_cols() {
            for (a, &c1) in h.col(i).iter().enumerate() {
                for &c2 in &h.col(i)[a + 1..] {
                    let shared = h
                        .row(c1 as usize)
                        .iter()
                        .filter(|u| h.row(c2 as usize).contains(u))
                        .count();
                    if shared > 1 {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn regular_columns_no_four_cycles() {
        let mut rng = seed::rng(3, &[]);
        let h = build(600, 180, 3, &mut rng).unwrap();
        assert!((0..600).all(|i| h.col_degree(i) == 3));
        assert!(h.is_transpose_consistent());
        assert!(!has_four_cycle(&h));
        // PEG balances check degrees to within a couple of edges
        let max = h.max_row_degree();
        let min = (0..180).map(|j| h.row_degree(j)).min().unwrap();
        assert!(max - min <= 2, "row degrees {min}..{max}");
    }

    #[test]
    fn degree_larger_than_check_count_fails() {
        let mut rng = seed::rng(3, &[]);
        assert!(build(10, 2, 3, &mut rng).is_err());
    }
}
