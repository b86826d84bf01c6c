//! Untainted puncturing across several matrices.
//!
//! A position chosen for one matrix is likely to create dead checks (checks
//! with two or more punctured neighbours) in the others, so strict
//! untaintedness in every matrix rarely yields enough positions. MUPA relaxes
//! it in tiers: the tier of a variable is the largest number of
//! already-punctured neighbours on any of its checks in any matrix. Tier 0
//! candidates are picked first, then tier 1, and so on, keeping dead checks as
//! few as the greedy order allows.

use super::pool::CandidatePool;
use super::{Error, Result};
use crate::ldpc::MatrixSet;
use crate::seed::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MupaSelection {
    /// Selected positions in selection order.
    pub order: Vec<usize>,
    /// Tier of each selected position at the moment it was chosen.
    pub tiers: Vec<u32>,
}

/// Two-hop neighbourhood sizes taken over the union of all matrices.
pub fn union_neighbourhood_sizes(set: &MatrixSet) -> Vec<u32> {
    let n = set.n_cols();
    let mut mark = vec![usize::MAX; n];
    (0..n)
        .map(|v| {
            mark[v] = v;
            let mut count = 0u32;
            for h in set.matrices() {
                for &c in h.col(v) {
                    for &u in h.row(c as usize) {
                        if mark[u as usize] != v {
                            mark[u as usize] = v;
                            count += 1;
                        }
                    }
                }
            }
            count
        })
        .collect()
}

/// Tier of `v` given per-matrix counts of punctured neighbours per check.
fn tier(set: &MatrixSet, counts: &[Vec<u32>], v: usize) -> u32 {
    set.matrices()
        .iter()
        .zip(counts)
        .flat_map(|(h, cnt)| h.col(v).iter().map(move |&c| cnt[c as usize]))
        .max()
        .unwrap_or(0)
}

/// Selects `p0` positions tier by tier.
///
/// Each phase takes the unselected variables at the current minimum tier as
/// its candidate pool, then repeatedly picks one with the smallest union
/// neighbourhood (uniformly among ties) and drops it and its union
/// neighbourhood from the pool. When the pool runs dry a new phase starts at
/// the new minimum tier; variables left behind at a lower tier are therefore
/// revisited before higher tiers, and the recorded tiers never decrease.
pub fn mupa(set: &MatrixSet, p0: usize, rng: &mut Rng) -> Result<MupaSelection> {
    let n = set.n_cols();
    if p0 > n {
        return Err(Error::Param(format!("p0 = {p0} exceeds n = {n}")));
    }
    let sizes = union_neighbourhood_sizes(set);
    let mut counts: Vec<Vec<u32>> = set.matrices().iter().map(|h| vec![0; h.n_rows()]).collect();
    let mut selected = vec![false; n];
    let mut order = Vec::with_capacity(p0);
    let mut tiers = Vec::with_capacity(p0);

    while order.len() < p0 {
        let current: Vec<u32> = (0..n)
            .map(|v| if selected[v] { u32::MAX } else { tier(set, &counts, v) })
            .collect();
        let k = *current.iter().min().expect("n > 0");
        let mut pool = CandidatePool::new(&sizes, (0..n).filter(|&v| current[v] == k));

        while order.len() < p0 {
            let Some(v) = pool.pick_min(rng) else { break };
            // Pool members share no check with anything picked in this phase,
            // so their tier is still k.
            debug_assert_eq!(tier(set, &counts, v), k);
            selected[v] = true;
            order.push(v);
            tiers.push(k);
            pool.remove(v);
            for (h, cnt) in set.matrices().iter().zip(counts.iter_mut()) {
                for &c in h.col(v) {
                    cnt[c as usize] += 1;
                    for &u in h.row(c as usize) {
                        pool.remove(u as usize);
                    }
                }
            }
        }
    }
    Ok(MupaSelection { order, tiers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::ParityCheckMatrix;
    use crate::rate_adapt::upa;
    use crate::seed;

    fn latin_set() -> MatrixSet {
        let rows = [
            vec![vec![0, 1], vec![2, 3]],
            vec![vec![0, 2], vec![1, 3]],
            vec![vec![0, 3], vec![1, 2]],
        ];
        let ms = rows
            .into_iter()
            .map(|r| ParityCheckMatrix::from_rows(4, r).unwrap())
            .collect();
        MatrixSet::new(ms, 0).unwrap()
    }

    #[test]
    fn latin_toy_covers_everything() {
        let set = latin_set();
        for s in 0..10 {
            let sel = mupa(&set, 4, &mut seed::rng(s, &[])).unwrap();
            let mut sorted = sel.order.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, vec![0, 1, 2, 3]);
            assert_eq!(sel.tiers, vec![0, 1, 1, 1]);
        }
    }

    #[test]
    fn empty_and_oversized_requests() {
        let set = latin_set();
        let sel = mupa(&set, 0, &mut seed::rng(0, &[])).unwrap();
        assert!(sel.order.is_empty());
        assert!(mupa(&set, 5, &mut seed::rng(0, &[])).is_err());
    }

    #[test]
    fn single_matrix_prefix_matches_upa() {
        for s in 0..20 {
            let set = MatrixSet::construct(40, 0.5, 1, s).unwrap();
            let full = upa(&set.matrices()[0], &mut seed::rng(s, &[7]));
            let p0 = full.len() / 2 + 1;
            let sel = mupa(&set, p0, &mut seed::rng(s, &[7])).unwrap();
            assert_eq!(sel.order, full[..p0]);
            assert!(sel.tiers.iter().all(|&t| t == 0));
        }
    }
}
