//! Per-frame arrival and termination distributions for each group.
//!
//! Arrivals: the group's uplink is good or bad as a whole for the frame. If
//! good, each idle UE requests with probability `p` and successes follow the
//! random-access distribution; if bad, nothing gets through.
//!
//! Terminations: each active connection ends independently with probability
//! `l = 1 - w_d + w_d q` (downlink outage, or completion on a good downlink).

use crate::error::{Error, Result};
use crate::rach::beta;
use crate::scenario::{Group, LinkId, ScenarioConfig};

/// Arrival and termination parameters for one (group, base station) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupKinetics {
    pub group: Group,
    pub bs: u8,
    pub population: u32,
    pub slots: u32,
    pub p: f64,
    pub w_up: f64,
    pub w_down: f64,
    /// Effective per-frame termination probability.
    pub l: f64,
}

impl GroupKinetics {
    pub fn for_link(cfg: &ScenarioConfig, link: LinkId) -> Self {
        let (group, bs) = match link {
            LinkId::G1Bs1 => (Group::One, 1),
            LinkId::G3Bs1 => (Group::Three, 1),
            LinkId::G3Bs2 => (Group::Three, 2),
            LinkId::G2Bs2 => (Group::Two, 2),
        };
        let lq = cfg.links.get(link);
        Self {
            group,
            bs,
            population: cfg.population(group),
            slots: cfg.slots(group),
            p: cfg.request_prob(group),
            w_up: lq.w_up,
            w_down: lq.w_down,
            l: cfg.termination_prob(link),
        }
    }

    /// Kinetics of the pair through which `group` requests access.
    pub fn access(cfg: &ScenarioConfig, group: Group) -> Self {
        Self::for_link(
            cfg,
            match group {
                Group::One => LinkId::G1Bs1,
                Group::Two => LinkId::G2Bs2,
                Group::Three => LinkId::G3Bs1,
            },
        )
    }
}

/// Binomial(n, p) probability masses for `0..=n`.
pub fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    let n = n as usize;
    if p <= 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        return v;
    }
    let q = 1.0 - p;
    let mut out = Vec::with_capacity(n + 1);
    let mut coeff = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            coeff *= (n - k + 1) as f64 / k as f64;
        }
        out.push(coeff * p.powi(k as i32) * q.powi((n - k) as i32));
    }
    out
}

/// Distribution of new successful requests given `active` connected UEs.
pub fn arrangement_dist(kin: &GroupKinetics, active: u32) -> Result<Vec<f64>> {
    if active > kin.population {
        return Err(Error::Domain(format!(
            "{active} active connections exceed group population {}",
            kin.population
        )));
    }
    let idle = kin.population - active;
    let mut out = vec![0.0; idle as usize + 1];
    let requesters = binomial_pmf(idle, kin.p);
    for (k, &pk) in requesters.iter().enumerate() {
        if pk == 0.0 {
            continue;
        }
        let b = beta(k as u32, kin.slots);
        for (j, &bj) in b.probs.iter().enumerate() {
            out[j] += kin.w_up * pk * bj;
        }
    }
    out[0] += 1.0 - kin.w_up;
    Ok(out)
}

/// Distribution of terminations among `active` connections.
pub fn termination_dist(kin: &GroupKinetics, active: u32) -> Vec<f64> {
    binomial_pmf(active, kin.l)
}

/// Every arrival and termination distribution a scenario can need,
/// precomputed once. Read-only after construction.
#[derive(Debug, Clone)]
pub struct KineticsTable {
    /// `arrivals[g][i][j]`: `j` successes from group `g` with `i` active.
    arrivals: [Vec<Vec<f64>>; 3],
    /// `arrival_tails[g][i][j]`: at least `j` successes.
    arrival_tails: [Vec<Vec<f64>>; 3],
    /// Indexed by link: 1@BS1, 3@BS1, 3@BS2, 2@BS2.
    terminations: [Vec<Vec<f64>>; 4],
}

fn link_slot(link: LinkId) -> usize {
    match link {
        LinkId::G1Bs1 => 0,
        LinkId::G3Bs1 => 1,
        LinkId::G3Bs2 => 2,
        LinkId::G2Bs2 => 3,
    }
}

impl KineticsTable {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        let arrivals = Group::ALL.map(|g| {
            let kin = GroupKinetics::access(cfg, g);
            (0..=kin.population)
                .map(|i| arrangement_dist(&kin, i).expect("i within population"))
                .collect::<Vec<_>>()
        });
        let arrival_tails = arrivals.clone().map(|per_i| {
            per_i
                .into_iter()
                .map(|dist| {
                    let mut tail = vec![0.0; dist.len() + 1];
                    for j in (0..dist.len()).rev() {
                        tail[j] = tail[j + 1] + dist[j];
                    }
                    tail
                })
                .collect()
        });
        let max_active = [
            cfg.n[0].min(cfg.m1),
            cfg.n[2].min(cfg.m1),
            cfg.n[2].min(cfg.k),
            cfg.n[1].min(cfg.m2),
        ];
        let links = [LinkId::G1Bs1, LinkId::G3Bs1, LinkId::G3Bs2, LinkId::G2Bs2];
        let terminations = [0, 1, 2, 3].map(|s| {
            let kin = GroupKinetics::for_link(cfg, links[s]);
            (0..=max_active[s]).map(|i| termination_dist(&kin, i)).collect()
        });
        Self {
            arrivals,
            arrival_tails,
            terminations,
        }
    }

    /// `S_i^{(j)}` for group `g`; zero outside the support.
    #[inline]
    pub fn s(&self, g: Group, active: u32, j: i64) -> f64 {
        if j < 0 {
            return 0.0;
        }
        self.arrivals[g.index()][active as usize]
            .get(j as usize)
            .copied()
            .unwrap_or(0.0)
    }

    /// `sum_{s >= j} S_i^{(s)}` for group `g`.
    #[inline]
    pub fn s_tail(&self, g: Group, active: u32, j: i64) -> f64 {
        let tails = &self.arrival_tails[g.index()][active as usize];
        if j <= 0 {
            return 1.0f64.min(tails[0]);
        }
        tails.get(j as usize).copied().unwrap_or(0.0)
    }

    pub fn arrivals(&self, g: Group, active: u32) -> &[f64] {
        &self.arrivals[g.index()][active as usize]
    }

    /// `T_i^{(j)}` on a link; zero outside the support.
    #[inline]
    pub fn t(&self, link: LinkId, active: u32, j: i64) -> f64 {
        if j < 0 || j > active as i64 {
            return 0.0;
        }
        self.terminations[link_slot(link)][active as usize][j as usize]
    }

    pub fn terminations(&self, link: LinkId, active: u32) -> &[f64] {
        &self.terminations[link_slot(link)][active as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Links;

    fn kin(pop: u32, slots: u32, p: f64, w_up: f64) -> GroupKinetics {
        GroupKinetics {
            group: Group::One,
            bs: 1,
            population: pop,
            slots,
            p,
            w_up,
            w_down: 1.0,
            l: 0.5,
        }
    }

    /// Enumerates every requester subset and every slot choice of the
    /// requesters, independent of the binomial/occupancy factorization.
    fn arrangement_oracle(idle: u32, slots: u32, p: f64, w_up: f64) -> Vec<f64> {
        let mut out = vec![0.0; idle as usize + 1];
        for mask in 0u32..(1 << idle) {
            let k = mask.count_ones();
            let subset_prob = p.powi(k as i32) * (1.0 - p).powi((idle - k) as i32);
            let combos = (slots as u64).pow(k);
            for code in 0..combos {
                let mut per_slot = vec![0u32; slots as usize];
                let mut c = code;
                for _ in 0..k {
                    per_slot[(c % slots as u64) as usize] += 1;
                    c /= slots as u64;
                }
                let singles = per_slot.iter().filter(|&&n| n == 1).count();
                out[singles] += w_up * subset_prob / combos as f64;
            }
        }
        out[0] += 1.0 - w_up;
        out
    }

    #[test]
    fn no_idle_means_no_arrivals() {
        let d = arrangement_dist(&kin(4, 3, 0.7, 0.9), 4).unwrap();
        assert_eq!(d, vec![1.0]);
    }

    #[test]
    fn two_idle_two_slots() {
        let d = arrangement_dist(&kin(2, 2, 0.5, 1.0), 0).unwrap();
        let expected = [0.375, 0.5, 0.125];
        for (a, b) in d.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let oracle = arrangement_oracle(2, 2, 0.5, 1.0);
        for (a, b) in d.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn two_idle_two_slots_half_outage() {
        let d = arrangement_dist(&kin(2, 2, 0.5, 0.5), 0).unwrap();
        let expected = [0.6875, 0.25, 0.0625];
        for (a, b) in d.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn arrangement_matches_enumeration_oracle() {
        for idle in 0..=5 {
            for slots in 1..=4 {
                for &(p, w) in &[(0.3, 0.8), (0.9, 1.0), (0.5, 0.25)] {
                    let d = arrangement_dist(&kin(idle + 2, slots, p, w), 2).unwrap();
                    let o = arrangement_oracle(idle, slots, p, w);
                    for (a, b) in d.iter().zip(&o) {
                        assert!((a - b).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_arrivals() {
        assert_eq!(arrangement_dist(&kin(3, 2, 0.0, 0.9), 0).unwrap()[0], 1.0);
        assert_eq!(arrangement_dist(&kin(3, 2, 0.6, 0.0), 0).unwrap()[0], 1.0);
        assert!(arrangement_dist(&kin(3, 2, 0.6, 0.5), 4).is_err());
    }

    #[test]
    fn termination_examples() {
        let k = kin(4, 1, 0.1, 1.0);
        assert_eq!(termination_dist(&k, 0), vec![1.0]);
        let d = termination_dist(&k, 2);
        assert!((d[0] - 0.25).abs() < 1e-15 && (d[1] - 0.5).abs() < 1e-15);
        let always = GroupKinetics { l: 1.0, ..k };
        assert_eq!(termination_dist(&always, 3), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn bad_downlink_always_terminates() {
        let cfg = ScenarioConfig {
            n: [3, 3, 3],
            m1: 2,
            m2: 2,
            k: 1,
            l: [2, 2, 2],
            p: [0.3; 3],
            q: 0.1,
            h: 1.0,
            links: Links {
                w_11: crate::radio::LinkQuality::new(0.9, 0.0),
                ..Links::uniform(0.8)
            },
        };
        let k = GroupKinetics::for_link(&cfg, LinkId::G1Bs1);
        assert_eq!(k.l, 1.0);
        assert_eq!(termination_dist(&k, 2), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn distributions_are_proper() {
        for pop in 0..12 {
            for i in 0..=pop {
                let d = arrangement_dist(&kin(pop, 3, 0.37, 0.66), i).unwrap();
                assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(d.iter().all(|&v| v >= 0.0));
                let t = termination_dist(&kin(pop, 3, 0.37, 0.66), i);
                assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
