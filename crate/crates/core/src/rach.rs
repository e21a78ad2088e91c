//! Success-count distribution of one frame of slotted-ALOHA random access.
//!
//! `k` requesters each pick one of `L` slots uniformly and independently. A
//! request succeeds when it is alone in its slot; colliding requests are lost
//! with no retry.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `L^k` the enumeration oracle will walk.
pub const ORACLE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RachOutcomeDistribution {
    pub k: u32,
    pub slots: u32,
    /// `probs[j]` for `j` in `0..=k`; entries above `min(k, L)` are zero.
    pub probs: Vec<f64>,
}

impl RachOutcomeDistribution {
    /// Probability that every requester is alone in its slot.
    pub fn all_succeed(&self) -> f64 {
        self.probs[self.k as usize]
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(j, p)| j as f64 * p)
            .sum()
    }
}

type Cache = RwLock<HashMap<(u32, u32), Arc<RachOutcomeDistribution>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Distribution of the number of successful requests among `k` requesters
/// contending for `slots` slots. Memoized per `(k, slots)`.
///
/// # Panics
/// If `slots == 0`.
pub fn beta(k: u32, slots: u32) -> Arc<RachOutcomeDistribution> {
    assert!(slots >= 1, "random access needs at least one slot");
    if let Some(hit) = cache().read().unwrap().get(&(k, slots)) {
        return Arc::clone(hit);
    }
    let dist = Arc::new(occupancy_singletons(k, slots));
    cache()
        .write()
        .unwrap()
        .entry((k, slots))
        .or_insert(dist)
        .clone()
}

/// Balls are dropped one at a time; the chain state is (slots holding exactly
/// one ball, slots holding two or more). Every update adds nonnegative terms,
/// so no cancellation occurs even for large `k` and `L`.
fn occupancy_singletons(k: u32, slots: u32) -> RachOutcomeDistribution {
    let l = slots as usize;
    let kk = k as usize;
    let lf = slots as f64;
    // mass[s][m]
    let mut mass = vec![vec![0.0f64; l + 1]; l + 1];
    mass[0][0] = 1.0;
    for _ in 0..kk {
        let mut next = vec![vec![0.0f64; l + 1]; l + 1];
        for s in 0..=l {
            for m in 0..=(l - s) {
                let w = mass[s][m];
                if w == 0.0 {
                    continue;
                }
                let empty = l - s - m;
                if empty > 0 {
                    next[s + 1][m] += w * empty as f64 / lf;
                }
                if s > 0 {
                    next[s - 1][m + 1] += w * s as f64 / lf;
                }
                if m > 0 {
                    next[s][m] += w * m as f64 / lf;
                }
            }
        }
        mass = next;
    }
    let mut probs = vec![0.0; kk + 1];
    for (s, row) in mass.iter().enumerate() {
        if s <= kk {
            probs[s] = row.iter().sum();
        }
    }
    RachOutcomeDistribution { k, slots, probs }
}

/// Exhaustive enumeration of all `slots^k` equally likely slot choices.
pub fn beta_oracle(k: u32, slots: u32) -> Result<RachOutcomeDistribution> {
    assert!(slots >= 1, "random access needs at least one slot");
    let total = (slots as u64)
        .checked_pow(k)
        .filter(|&t| t <= ORACLE_BUDGET)
        .ok_or(Error::Capacity {
            what: "slot-assignment enumeration",
            needed: (slots as f64).powi(k as i32).min(u64::MAX as f64) as u64,
            budget: ORACLE_BUDGET,
        })?;
    let kk = k as usize;
    let mut counts = vec![0u64; kk + 1];
    let mut choice = vec![0u32; kk];
    let mut per_slot = vec![0u32; slots as usize];
    for _ in 0..total {
        per_slot.iter_mut().for_each(|c| *c = 0);
        for &c in &choice {
            per_slot[c as usize] += 1;
        }
        let singles = per_slot.iter().filter(|&&c| c == 1).count();
        counts[singles] += 1;
        // odometer increment
        for digit in choice.iter_mut() {
            *digit += 1;
            if *digit < slots {
                break;
            }
            *digit = 0;
        }
    }
    let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(RachOutcomeDistribution { k, slots, probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn lone_requester_always_succeeds() {
        for l in 1..6 {
            assert_eq!(beta(1, l).probs, vec![0.0, 1.0]);
        }
    }

    #[test]
    fn two_in_two() {
        assert_close(&beta(2, 2).probs, &[0.5, 0.0, 0.5], 1e-15);
    }

    #[test]
    fn three_in_two() {
        assert_close(&beta(3, 2).probs, &[0.25, 0.75, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn oracle_edge_cases() {
        assert_eq!(beta_oracle(0, 3).unwrap().probs, vec![1.0]);
        assert_eq!(beta_oracle(2, 1).unwrap().probs, vec![1.0, 0.0, 0.0]);
        assert!(matches!(beta_oracle(12, 10), Err(Error::Capacity { .. })));
    }

    #[test]
    fn matches_oracle_on_small_grid() {
        for k in 0..=8 {
            for l in 1..=6 {
                let fast = beta(k, l);
                let slow = beta_oracle(k, l).unwrap();
                assert_close(&fast.probs, &slow.probs, 1e-12);
            }
        }
    }

    #[test]
    fn large_instances_stay_normalized() {
        let d = beta(40, 40);
        let s: f64 = d.probs.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(d.probs.iter().all(|&p| p >= 0.0));
        let expected = 40.0 * (1.0 - 1.0 / 40.0f64).powi(39);
        assert!((d.mean() - expected).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn mean_and_support(k in 0u32..30, l in 1u32..30) {
            let d = beta(k, l);
            let s: f64 = d.probs.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            for (j, &p) in d.probs.iter().enumerate() {
                prop_assert!(p >= 0.0);
                if j > k.min(l) as usize {
                    prop_assert_eq!(p, 0.0);
                }
            }
            let expected = if k == 0 { 0.0 } else {
                k as f64 * (1.0 - 1.0 / l as f64).powi(k as i32 - 1)
            };
            prop_assert!((d.mean() - expected).abs() < 1e-10);
        }
    }
}
