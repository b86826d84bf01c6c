use std::collections::BTreeMap;

use rand::Rng as _;

use crate::seed::Rng;

/// Candidate variables bucketed by neighbourhood size.
///
/// Each bucket is kept sorted so a seeded index pick among the minimum
/// bucket is reproducible.
pub(super) struct CandidatePool<'a> {
    key: &'a [u32],
    buckets: BTreeMap<u32, Vec<u32>>,
    member: Vec<bool>,
    len: usize,
}

impl<'a> CandidatePool<'a> {
    pub(super) fn new(key: &'a [u32], members: impl IntoIterator<Item = usize>) -> Self {
        let mut buckets: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        let mut member = vec![false; key.len()];
        let mut len = 0;
        for v in members {
            if !member[v] {
                member[v] = true;
                len += 1;
                buckets.entry(key[v]).or_default().push(v as u32);
            }
        }
        for b in buckets.values_mut() {
            b.sort_unstable();
        }
        Self { key, buckets, member, len }
    }

    pub(super) fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Uniform pick among the members with the smallest key. Does not remove.
    pub(super) fn pick_min(&self, rng: &mut Rng) -> Option<usize> {
        let (_, bucket) = self.buckets.iter().next()?;
        Some(bucket[rng.gen_range(0..bucket.len())] as usize)
    }

    pub(super) fn remove(&mut self, v: usize) {
        if !self.member[v] {
            return;
        }
        self.member[v] = false;
        self.len -= 1;
        let k = self.key[v];
        let bucket = self.buckets.get_mut(&k).expect("member has a bucket");
        let at = bucket.binary_search(&(v as u32)).expect("member is in its bucket");
        bucket.remove(at);
        if bucket.is_empty() {
            self.buckets.remove(&k);
        }
    }
}
