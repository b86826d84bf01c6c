//! Untainted puncturing for a single matrix.

use super::pool::CandidatePool;
use crate::ldpc::ParityCheckMatrix;
use crate::seed::Rng;

/// Size of the two-hop variable neighbourhood of every variable: the distinct
/// variables other than `v` sharing at least one check with it.
pub fn neighbourhood_sizes(h: &ParityCheckMatrix) -> Vec<u32> {
    let n = h.n_cols();
    let mut mark = vec![usize::MAX; n];
    (0..n)
        .map(|v| {
            mark[v] = v;
            let mut count = 0u32;
            for &c in h.col(v) {
                for &u in h.row(c as usize) {
                    if mark[u as usize] != v {
                        mark[u as usize] = v;
                        count += 1;
                    }
                }
            }
            count
        })
        .collect()
}

/// Greedy untainted puncturing.
///
/// Repeatedly picks a candidate with the smallest two-hop neighbourhood
/// (uniformly among ties), then drops it and its neighbourhood from the
/// candidates. No check ends up with two selected neighbours. Runs until the
/// candidate set is empty and returns positions in selection order.
pub fn upa(h: &ParityCheckMatrix, rng: &mut Rng) -> Vec<usize> {
    let sizes = neighbourhood_sizes(h);
    let mut pool = CandidatePool::new(&sizes, 0..h.n_cols());
    let mut order = Vec::new();
    while let Some(v) = pool.pick_min(rng) {
        order.push(v);
        pool.remove(v);
        for &c in h.col(v) {
            for &u in h.row(c as usize) {
                pool.remove(u as usize);
            }
        }
    }
    debug_assert!(pool.is_empty());
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::MatrixSet;
    use crate::seed;
    use proptest::prelude::*;

    fn max_selected_per_check(h: &ParityCheckMatrix, picked: &[usize]) -> usize {
        (0..h.n_rows())
            .map(|j| h.row(j).iter().filter(|&&v| picked.contains(&(v as usize))).count())
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn two_disjoint_checks() {
        let h = ParityCheckMatrix::from_rows(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        for s in 0..20 {
            let mut order = upa(&h, &mut seed::rng(s, &[]));
            assert_eq!(order.len(), 2);
            order.sort_unstable();
            assert!(order[0] < 2 && order[1] >= 2);
        }
    }

    #[test]
    fn neighbourhoods_of_toy() {
        let h = ParityCheckMatrix::from_rows(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(neighbourhood_sizes(&h), vec![1, 2, 1]);
    }

    #[test]
    fn seeded_runs_repeat() {
        let set = MatrixSet::construct(300, 0.6, 1, 4).unwrap();
        let h = &set.matrices()[0];
        assert_eq!(upa(h, &mut seed::rng(5, &[])), upa(h, &mut seed::rng(5, &[])));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn untainted_and_maximal(seed in any::<u64>(), rate_idx in 0usize..3) {
            let rate = [0.5, 0.6, 0.8][rate_idx];
            let set = MatrixSet::construct(40, rate, 1, seed).unwrap();
            let h = &set.matrices()[0];
            let order = upa(h, &mut seed::rng(seed, &[1]));
            prop_assert!(max_selected_per_check(h, &order) <= 1);
            // maximal: every unselected variable shares a check with a selected one
            for v in 0..h.n_cols() {
                if order.contains(&v) { continue; }
                let mut extended = order.clone();
                extended.push(v);
                prop_assert!(max_selected_per_check(h, &extended) >= 2);
            }
        }
    }
}
