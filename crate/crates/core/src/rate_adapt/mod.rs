//! Puncturing and shortening plans.
//!
//! A reconciliation at a fixed mother rate `R0 = 1 - m/n` is tuned by
//! puncturing `p` bits (raising the rate) and shortening `s` of them
//! (lowering it again). The plan starts with `p0` punctured positions chosen by
//! [`upa`] or [`mupa`] and no shortened ones, then moves punctured positions
//! to the shortened set round by round via [`convert_p2s`].

mod pool;
pub mod mupa;
pub mod upa;

use std::collections::BTreeSet;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::metrics::binary_entropy;
use crate::ldpc::MatrixSet;
use crate::seed::Rng;

pub use mupa::{mupa, MupaSelection};
pub use upa::upa;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rate inadmissible: m = {m} checks cannot reach efficiency {f_d} at e = {e} (n = {n})")]
    RateInadmissible { m: usize, n: usize, e: f64, f_d: f64 },
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("no punctured bits left to shorten")]
    Exhausted,
    #[error("invalid puncture plan: {0}")]
    InvalidPlan(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Number of initially punctured bits that brings the efficiency to `f_d`:
/// `floor((m - n h(e) f_d) / (1 - h(e) f_d))`. No bits start shortened.
pub fn initial_budget(m: usize, n: usize, e: f64, f_d: f64) -> Result<usize> {
    if !(e > 0.0 && e < 0.5) {
        return Err(Error::Param(format!("error rate {e} outside (0, 0.5)")));
    }
    if !(f_d.is_finite() && f_d > 0.0) {
        return Err(Error::Param(format!("target efficiency {f_d} must be positive")));
    }
    let inadmissible = || Error::RateInadmissible { m, n, e, f_d };
    let leak = binary_entropy(e) * f_d;
    if leak >= 1.0 {
        return Err(inadmissible());
    }
    let x = (m as f64 - n as f64 * leak) / (1.0 - leak);
    // Absorb rounding noise so an exactly-zero numerator is not reported as negative.
    const SLACK: f64 = 1e-9;
    if x < -SLACK * n as f64 {
        return Err(inadmissible());
    }
    Ok((x.max(0.0) + SLACK).floor() as usize)
}

/// How many punctured bits a failed round converts to shortened ones.
pub fn p2s_count(p0: usize, delta: f64, punctured: usize) -> usize {
    let target = p0 as f64 * delta;
    if target < 1.0 {
        1
    } else if target <= punctured as f64 {
        target.floor() as usize
    } else {
        punctured
    }
}

/// Punctured and shortened position sets of one session.
///
/// `order` is the selection order produced by UPA/MUPA; `punctured` and
/// `shortened` always partition it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PuncturePlan {
    pub p0: usize,
    pub order: Vec<usize>,
    pub punctured: BTreeSet<usize>,
    pub shortened: BTreeSet<usize>,
}

impl PuncturePlan {
    /// Plan with every position of `order` punctured.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let punctured: BTreeSet<usize> = order.iter().copied().collect();
        if punctured.len() != order.len() {
            return Err(Error::InvalidPlan("order repeats a position".into()));
        }
        Ok(Self {
            p0: order.len(),
            order,
            punctured,
            shortened: BTreeSet::new(),
        })
    }

    /// Empty plan (no rate adaptation).
    pub fn none() -> Self {
        Self {
            p0: 0,
            order: Vec::new(),
            punctured: BTreeSet::new(),
            shortened: BTreeSet::new(),
        }
    }

    /// Chooses `p0` positions for `set`: UPA for a single matrix, MUPA
    /// otherwise. UPA output shorter than `p0` is completed by uniform
    /// draws among the remaining positions.
    pub fn derive(set: &MatrixSet, p0: usize, rng: &mut Rng) -> Result<Self> {
        let n = set.n_cols();
        if p0 > n {
            return Err(Error::Param(format!("p0 = {p0} exceeds n = {n}")));
        }
        let order = if set.len() == 1 {
            let mut order = upa(&set.matrices()[0], rng);
            order.truncate(p0);
            extend_uniform(&mut order, n, p0, rng);
            order
        } else {
            mupa(set, p0, rng)?.order
        };
        Self::new(order)
    }

    /// Checks `|P| + |S| = p0`, disjointness and `P ∪ S = order`, and that all
    /// positions are below `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.order.len() != self.p0 {
            return Err(Error::InvalidPlan(format!("order has {} entries, p0 = {}", self.order.len(), self.p0)));
        }
        if self.punctured.len() + self.shortened.len() != self.p0 {
            return Err(Error::InvalidPlan("|P| + |S| != p0".into()));
        }
        if !self.punctured.is_disjoint(&self.shortened) {
            return Err(Error::InvalidPlan("P and S overlap".into()));
        }
        let all: BTreeSet<usize> = self.order.iter().copied().collect();
        if all.len() != self.order.len() {
            return Err(Error::InvalidPlan("order repeats a position".into()));
        }
        if !self.punctured.iter().chain(&self.shortened).all(|v| all.contains(v)) {
            return Err(Error::InvalidPlan("P ∪ S differs from order".into()));
        }
        if let Some(&v) = all.iter().next_back().filter(|&&v| v >= n) {
            return Err(Error::InvalidPlan(format!("position {v} out of range for n = {n}")));
        }
        Ok(())
    }

    /// Parses and validates a JSON plan for a code of length `n`.
    pub fn from_json(text: &str, n: usize) -> Result<Self> {
        let plan: Self = serde_json::from_str(text).map_err(|e| Error::InvalidPlan(e.to_string()))?;
        plan.validate(n)?;
        Ok(plan)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plan serializes")
    }

    /// Marks the given punctured positions as shortened.
    pub fn shorten(&mut self, positions: &[usize]) -> Result<()> {
        if let Some(v) = positions.iter().find(|v| !self.punctured.contains(v)) {
            return Err(Error::InvalidPlan(format!("position {v} is not punctured")));
        }
        for v in positions {
            self.punctured.remove(v);
            self.shortened.insert(*v);
        }
        Ok(())
    }

    pub fn is_punctured(&self, v: usize) -> bool {
        self.punctured.contains(&v)
    }

    pub fn is_shortened(&self, v: usize) -> bool {
        self.shortened.contains(&v)
    }
}

/// Moves `P2S` uniformly chosen punctured positions into the shortened set and
/// returns them in ascending order.
pub fn convert_p2s(plan: &mut PuncturePlan, delta: f64, rng: &mut Rng) -> Result<Vec<usize>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Param(format!("delta {delta} outside (0, 1)")));
    }
    if plan.punctured.is_empty() {
        return Err(Error::Exhausted);
    }
    let count = p2s_count(plan.p0, delta, plan.punctured.len());
    let pool: Vec<usize> = plan.punctured.iter().copied().collect();
    let mut picked: Vec<usize> = index::sample(rng, pool.len(), count).into_iter().map(|k| pool[k]).collect();
    picked.sort_unstable();
    plan.shorten(&picked)?;
    Ok(picked)
}

/// Appends uniformly drawn unused positions until `order` holds `p0` entries.
fn extend_uniform(order: &mut Vec<usize>, n: usize, p0: usize, rng: &mut Rng) {
    if order.len() >= p0 {
        return;
    }
    let used: BTreeSet<usize> = order.iter().copied().collect();
    let rest: Vec<usize> = (0..n).filter(|v| !used.contains(v)).collect();
    let need = p0 - order.len();
    order.extend(index::sample(rng, rest.len(), need).into_iter().map(|k| rest[k]));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use proptest::prelude::*;

    #[test]
    fn budget_matches_formula() {
        assert_eq!(initial_budget(4000, 10000, 0.067, 1.1), Ok(162));
        assert!(matches!(
            initial_budget(4000, 10000, 0.2, 1.1),
            Err(Error::RateInadmissible { .. })
        ));
        assert!(initial_budget(4000, 10000, 0.0, 1.1).is_err());
        assert!(initial_budget(4000, 10000, 0.6, 1.1).is_err());
    }

    #[test]
    fn budget_zero_at_boundary() {
        let (m, n, e) = (4000usize, 10000usize, 0.067);
        let f_d = m as f64 / (n as f64 * binary_entropy(e));
        assert_eq!(initial_budget(m, n, e, f_d), Ok(0));
    }

    #[test]
    fn p2s_cases() {
        assert_eq!(p2s_count(161, 0.02, 161), 3);
        assert_eq!(p2s_count(161, 0.02, 2), 2);
        assert_eq!(p2s_count(40, 0.02, 40), 1);
        assert_eq!(p2s_count(40, 0.02, 1), 1);
    }

    #[test]
    fn convert_moves_distinct_punctured_bits() {
        let mut plan = PuncturePlan::new((0..161).map(|v| v * 3).collect()).unwrap();
        let mut rng = seed::rng(1, &[]);
        let moved = convert_p2s(&mut plan, 0.02, &mut rng).unwrap();
        assert_eq!(moved.len(), 3);
        assert!(moved.iter().all(|v| plan.shortened.contains(v) && !plan.punctured.contains(v)));
        plan.validate(1000).unwrap();
    }

    #[test]
    fn convert_signals_exhaustion() {
        let mut plan = PuncturePlan::new(vec![4, 2]).unwrap();
        let mut rng = seed::rng(1, &[]);
        while !plan.punctured.is_empty() {
            convert_p2s(&mut plan, 0.5, &mut rng).unwrap();
            assert_eq!(plan.punctured.len() + plan.shortened.len(), 2);
        }
        assert_eq!(convert_p2s(&mut plan, 0.5, &mut rng), Err(Error::Exhausted));
        assert!(convert_p2s(&mut plan, 1.0, &mut rng).is_err());
    }

    #[test]
    fn json_plan_validation() {
        let plan = PuncturePlan::new(vec![5, 1, 3]).unwrap();
        let text = plan.to_json();
        assert_eq!(PuncturePlan::from_json(&text, 6).unwrap(), plan);
        assert!(PuncturePlan::from_json(&text, 5).is_err());
        let overlap = r#"{"p0":2,"order":[1,2],"punctured":[1,2],"shortened":[2]}"#;
        assert!(PuncturePlan::from_json(overlap, 6).is_err());
        assert!(PuncturePlan::from_json("{", 6).is_err());
    }

    #[test]
    fn derive_pads_short_upa_output() {
        let set = MatrixSet::construct(60, 0.5, 1, 2).unwrap();
        let mut rng = seed::rng(9, &[]);
        let plan = PuncturePlan::derive(&set, 40, &mut rng).unwrap();
        assert_eq!(plan.order.len(), 40);
        plan.validate(60).unwrap();
    }

    proptest! {
        #[test]
        fn p2s_conserves_budget(p0 in 1usize..300, delta in 0.001f64..0.999, seed in any::<u64>()) {
            let mut plan = PuncturePlan::new((0..p0).collect()).unwrap();
            let mut rng = seed::rng(seed, &[]);
            let mut rounds = 0;
            while let Ok(moved) = convert_p2s(&mut plan, delta, &mut rng) {
                rounds += 1;
                let distinct: BTreeSet<_> = moved.iter().collect();
                prop_assert_eq!(distinct.len(), moved.len());
                prop_assert_eq!(plan.punctured.len() + plan.shortened.len(), p0);
            }
            let step = ((p0 as f64 * delta).floor() as usize).max(1);
            prop_assert!(rounds <= p0.div_ceil(step));
        }
    }
}
