//! Blocking, collision and utilization from a stationary distribution.
//!
//! Blocking and collision are per-frame events: "at least one request of the
//! group was blocked (collided) in the frame".

use serde::{Deserialize, Serialize};

use crate::chain::{SteadyStateDistribution, SystemState};
use crate::error::{Error, Result};
use crate::kinetics::{binomial_pmf, KineticsTable};
use crate::rach::beta;
use crate::scenario::{Group, LinkId, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Analytical,
    MonteCarlo,
}

/// Standard errors across Monte Carlo replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsStderr {
    pub b: [f64; 3],
    pub d: [f64; 3],
    pub u: f64,
    pub throughput: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Blocking probability per group.
    pub b: [f64; 3],
    /// Collision probability per group.
    pub d: [f64; 3],
    /// Fraction of the `M_1 + M_2` channels in use.
    pub u: f64,
    /// `U (M_1 + M_2) H`, bits/s.
    pub throughput: f64,
    pub source: Source,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<MetricsStderr>,
}

impl MetricsReport {
    pub const CSV_HEADER: [&'static str; 17] = [
        "source", "U", "throughput", "B1", "B2", "B3", "D1", "D2", "D3", "U_se", "throughput_se",
        "B1_se", "B2_se", "B3_se", "D1_se", "D2_se", "D3_se",
    ];

    /// Values in [`Self::CSV_HEADER`] order; standard errors are empty for
    /// analytical rows.
    pub fn csv_fields(&self) -> Vec<String> {
        let src = match self.source {
            Source::Analytical => "analytical",
            Source::MonteCarlo => "monte-carlo",
        };
        let mut v = vec![src.to_string(), fmt(self.u), fmt(self.throughput)];
        v.extend(self.b.iter().chain(&self.d).map(|&x| fmt(x)));
        match &self.stderr {
            Some(se) => {
                v.push(fmt(se.u));
                v.push(fmt(se.throughput));
                v.extend(se.b.iter().chain(&se.d).map(|&x| fmt(x)));
            }
            None => v.extend(std::iter::repeat_n(String::new(), 8)),
        }
        v
    }

    pub fn blocking(&self, g: Group) -> f64 {
        self.b[g.index()]
    }

    pub fn collision(&self, g: Group) -> f64 {
        self.d[g.index()]
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

fn check_dims(pi: &SteadyStateDistribution, cfg: &ScenarioConfig) -> Result<()> {
    if pi.states.iter().all(|s| s.is_valid(cfg)) {
        Ok(())
    } else {
        Err(Error::Integrity("distribution holds states outside the scenario".into()))
    }
}

/// Blocking probability of group 1 or 2: some success finds no free channel
/// on the home cell after this frame's terminations.
pub fn blocking_home(pi: &SteadyStateDistribution, cfg: &ScenarioConfig, group: Group) -> Result<f64> {
    check_dims(pi, cfg)?;
    let tab = KineticsTable::new(cfg);
    blocking_home_with(&tab, pi, cfg, group)
}

fn blocking_home_with(
    tab: &KineticsTable,
    pi: &SteadyStateDistribution,
    cfg: &ScenarioConfig,
    group: Group,
) -> Result<f64> {
    let (home_link, g3_link, cap) = match group {
        Group::One => (LinkId::G1Bs1, LinkId::G3Bs1, cfg.m1),
        Group::Two => (LinkId::G2Bs2, LinkId::G3Bs2, cfg.m2),
        Group::Three => {
            return Err(Error::Domain("home-cell blocking is defined for groups 1 and 2".into()))
        }
    };
    let mut total = 0.0;
    for (s, &w) in pi.states.iter().zip(&pi.pi) {
        if w == 0.0 {
            continue;
        }
        let (x, y) = match group {
            Group::One => (s.a, s.b),
            _ => (s.d, s.c),
        };
        let mut p = 0.0;
        for (i, &ti) in tab.terminations(home_link, x).iter().enumerate() {
            for (k, &tk) in tab.terminations(g3_link, y).iter().enumerate() {
                let free = (cap - x - y) as i64 + i as i64 + k as i64;
                p += ti * tk * tab.s_tail(group, x, free + 1);
            }
        }
        total += w * p;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Group-1 channels taken on cell 1: all `j_a` successes, or the free
/// channels left after terminations if fewer.
pub fn g_a(m1: u32, a: u32, b: u32, i_a: u32, i: u32, j_a: u32) -> u32 {
    j_a.min(m1 + i_a + i - a - b)
}

/// Cell-2 free channels left after group-2 admission (may be negative when
/// group 2 is itself blocked).
pub fn g_e(m2: u32, c: u32, d: u32, i_d: u32, j: u32, j_d: u32) -> i64 {
    m2 as i64 - c as i64 - d as i64 + i_d as i64 + j as i64 - j_d as i64
}

/// Channels group 3 may still take on cell 2: free channels after group-2
/// admission, capped at `K` minus the surviving group-3 count.
pub fn g_c(k: u32, c: u32, j: u32, g_e: i64) -> u32 {
    let room = (k + j - c) as i64;
    g_e.max(0).min(room) as u32
}

/// Group-3 blocking: the group-3 successes exceed the cell-1 channels left
/// after group 1 is admitted plus the offload room on cell 2.
pub fn blocking_ttr(pi: &SteadyStateDistribution, cfg: &ScenarioConfig) -> Result<f64> {
    check_dims(pi, cfg)?;
    let tab = KineticsTable::new(cfg);
    Ok(blocking_ttr_with(&tab, pi, cfg))
}

/// Distribution of cell-1 free channels after group-1 admission, taken over
/// `(i_a, j_a, i)`.
fn cell1_free_dist(tab: &KineticsTable, cfg: &ScenarioConfig, s: &SystemState) -> Vec<f64> {
    let mut dist = vec![0.0; cfg.m1 as usize + 1];
    for (i_a, &ta) in tab.terminations(LinkId::G1Bs1, s.a).iter().enumerate() {
        for (i, &tb) in tab.terminations(LinkId::G3Bs1, s.b).iter().enumerate() {
            let (i_a, i) = (i_a as u32, i as u32);
            for (j_a, &sa) in tab.arrivals(Group::One, s.a).iter().enumerate() {
                let ga = g_a(cfg.m1, s.a, s.b, i_a, i, j_a as u32);
                let free1 = cfg.m1 + i_a + i - s.a - s.b - ga;
                dist[free1 as usize] += ta * tb * sa;
            }
        }
    }
    dist
}

/// Distribution of group-3 room on cell 2 after group-2 admission, taken
/// over `(i_d, j_d, j)`. With `K = M_2` the cap never binds and the room is
/// simply the free channels `M_2 - c - d + i_d + j - g_d`.
fn cell2_room_dist(tab: &KineticsTable, cfg: &ScenarioConfig, s: &SystemState) -> Vec<f64> {
    let mut dist = vec![0.0; cfg.m2 as usize + 1];
    for (i_d, &td) in tab.terminations(LinkId::G2Bs2, s.d).iter().enumerate() {
        for (j, &tc) in tab.terminations(LinkId::G3Bs2, s.c).iter().enumerate() {
            let (i_d, j) = (i_d as u32, j as u32);
            for (j_d, &sd) in tab.arrivals(Group::Two, s.d).iter().enumerate() {
                let room = if cfg.k == cfg.m2 {
                    // g_d: group-2 admissions, same form as g_a on cell 2
                    let gd = g_a(cfg.m2, s.c, s.d, i_d, j, j_d as u32);
                    cfg.m2 + i_d + j - s.c - s.d - gd
                } else {
                    g_c(cfg.k, s.c, j, g_e(cfg.m2, s.c, s.d, i_d, j, j_d as u32))
                };
                dist[room as usize] += td * tc * sd;
            }
        }
    }
    dist
}

fn blocking_ttr_with(tab: &KineticsTable, pi: &SteadyStateDistribution, cfg: &ScenarioConfig) -> f64 {
    let mut total = 0.0;
    for (s, &w) in pi.states.iter().zip(&pi.pi) {
        if w == 0.0 {
            continue;
        }
        let d1 = cell1_free_dist(tab, cfg, s);
        let d2 = cell2_room_dist(tab, cfg, s);
        let active = s.b + s.c;
        let mut p = 0.0;
        for (f1, &p1) in d1.iter().enumerate() {
            if p1 == 0.0 {
                continue;
            }
            for (f2, &p2) in d2.iter().enumerate() {
                if p2 == 0.0 {
                    continue;
                }
                // phi: smallest group-3 success count that is blocked
                let phi = (f1 + f2) as i64 + 1;
                p += p1 * p2 * tab.s_tail(Group::Three, active, phi);
            }
        }
        total += w * p;
    }
    total.clamp(0.0, 1.0)
}

/// Active connection count `eta` that leaves the rest of a group idle.
fn eta(s: &SystemState, g: Group) -> u32 {
    match g {
        Group::One => s.a,
        Group::Two => s.d,
        Group::Three => s.b + s.c,
    }
}

/// Collision probability: the group's uplink is good and not every
/// requester has a slot to itself.
pub fn collision(pi: &SteadyStateDistribution, cfg: &ScenarioConfig, group: Group) -> Result<f64> {
    check_dims(pi, cfg)?;
    let n = cfg.population(group);
    let slots = cfg.slots(group);
    let w_up = cfg.access_link(group).w_up;
    let p = cfg.request_prob(group);
    let per_state: Vec<f64> = (0..=n)
        .map(|active| {
            binomial_pmf(n - active, p)
                .iter()
                .enumerate()
                .map(|(k, &pk)| pk * (1.0 - beta(k as u32, slots).all_succeed()))
                .sum::<f64>()
                * w_up
        })
        .collect();
    let total: f64 = pi
        .states
        .iter()
        .zip(&pi.pi)
        .map(|(s, &w)| w * per_state[eta(s, group) as usize])
        .sum();
    Ok(total.clamp(0.0, 1.0))
}

/// Channel utilization `U` and throughput `U (M_1 + M_2) H`.
pub fn utilization(pi: &SteadyStateDistribution, cfg: &ScenarioConfig) -> (f64, f64) {
    let m = cfg.total_channels() as f64;
    let busy: f64 = pi
        .states
        .iter()
        .zip(&pi.pi)
        .map(|(s, &w)| s.total() as f64 * w)
        .sum();
    let u = (busy / m).clamp(0.0, 1.0);
    (u, u * m * cfg.h)
}

/// All metrics from one stationary distribution.
pub fn evaluate(pi: &SteadyStateDistribution, cfg: &ScenarioConfig) -> Result<MetricsReport> {
    check_dims(pi, cfg)?;
    let tab = KineticsTable::new(cfg);
    let (u, throughput) = utilization(pi, cfg);
    Ok(MetricsReport {
        b: [
            blocking_home_with(&tab, pi, cfg, Group::One)?,
            blocking_home_with(&tab, pi, cfg, Group::Two)?,
            blocking_ttr_with(&tab, pi, cfg),
        ],
        d: [
            collision(pi, cfg, Group::One)?,
            collision(pi, cfg, Group::Two)?,
            collision(pi, cfg, Group::Three)?,
        ],
        u,
        throughput,
        source: Source::Analytical,
        stderr: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_enumeration, steady_state, SolveOptions};
    use crate::frame::admit;
    use crate::radio::LinkQuality;
    use crate::scenario::Links;

    fn cfg(n: [u32; 3], m1: u32, m2: u32, k: u32, l: [u32; 3], p: f64, q: f64, w: [f64; 4]) -> ScenarioConfig {
        ScenarioConfig {
            n,
            m1,
            m2,
            k,
            l,
            p: [p; 3],
            q,
            h: 1000.0,
            links: Links {
                w_11: LinkQuality::reciprocal(w[0]),
                w_31: LinkQuality::reciprocal(w[1]),
                w_32: LinkQuality::reciprocal(w[2]),
                w_22: LinkQuality::reciprocal(w[3]),
            },
        }
    }

    fn solve(c: &ScenarioConfig) -> SteadyStateDistribution {
        steady_state(&build_enumeration(c).unwrap(), SolveOptions::default()).unwrap()
    }

    /// Per-state blocking by enumerating every termination and success
    /// count of every group and running the admission rules.
    fn frame_oracle(c: &ScenarioConfig, pi: &SteadyStateDistribution) -> [f64; 3] {
        let tab = KineticsTable::new(c);
        let mut out = [0.0; 3];
        for (s, &w) in pi.states.iter().zip(&pi.pi) {
            let ta = tab.terminations(LinkId::G1Bs1, s.a);
            let tb = tab.terminations(LinkId::G3Bs1, s.b);
            let tc = tab.terminations(LinkId::G3Bs2, s.c);
            let td = tab.terminations(LinkId::G2Bs2, s.d);
            let s1 = tab.arrivals(Group::One, s.a);
            let s2 = tab.arrivals(Group::Two, s.d);
            let s3 = tab.arrivals(Group::Three, s.b + s.c);
            for (ia, &pa) in ta.iter().enumerate() {
                for (ib, &pb) in tb.iter().enumerate() {
                    for (ic, &pc) in tc.iter().enumerate() {
                        for (id, &pd) in td.iter().enumerate() {
                            let after = SystemState::new(
                                s.a - ia as u32,
                                s.b - ib as u32,
                                s.c - ic as u32,
                                s.d - id as u32,
                            );
                            let pt = w * pa * pb * pc * pd;
                            for (x1, &q1) in s1.iter().enumerate() {
                                for (x2, &q2) in s2.iter().enumerate() {
                                    for (x3, &q3) in s3.iter().enumerate() {
                                        let o = admit(c, after, [x1 as u32, x2 as u32, x3 as u32]);
                                        let pr = pt * q1 * q2 * q3;
                                        for g in 0..3 {
                                            if o.blocked[g] {
                                                out[g] += pr;
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn blocking_matches_frame_oracle() {
        for c in [
            cfg([3, 3, 3], 2, 2, 1, [2, 2, 3], 0.6, 0.2, [0.9, 0.8, 0.7, 0.95]),
            cfg([3, 3, 3], 2, 2, 2, [2, 2, 3], 0.6, 0.2, [0.9, 0.8, 0.7, 0.95]),
            cfg([3, 3, 3], 2, 2, 0, [3, 3, 3], 0.8, 0.1, [1.0; 4]),
            cfg([2, 4, 5], 3, 2, 1, [2, 4, 4], 0.5, 0.3, [0.85, 0.6, 0.9, 0.7]),
            cfg([4, 2, 5], 2, 3, 2, [3, 2, 6], 0.7, 0.25, [0.9, 0.9, 0.8, 0.6]),
        ] {
            let pi = solve(&c);
            let oracle = frame_oracle(&c, &pi);
            let r = evaluate(&pi, &c).unwrap();
            for g in 0..3 {
                assert!((r.b[g] - oracle[g]).abs() < 1e-9, "B{} {} vs {}", g + 1, r.b[g], oracle[g]);
            }
        }
    }

    #[test]
    fn no_traffic_no_events() {
        let c = cfg([3, 3, 3], 2, 2, 1, [2, 2, 2], 0.0, 0.2, [0.9; 4]);
        let r = evaluate(&solve(&c), &c).unwrap();
        assert_eq!(r.b, [0.0; 3]);
        assert_eq!(r.d, [0.0; 3]);
        assert!(r.u.abs() < 1e-12);
    }

    #[test]
    fn lone_ue_never_collides() {
        let c = cfg([1, 1, 1], 1, 1, 1, [1, 1, 1], 0.9, 0.2, [0.9; 4]);
        let r = evaluate(&solve(&c), &c).unwrap();
        assert_eq!(r.d, [0.0; 3]);
    }

    #[test]
    fn forced_collision() {
        // two idle UEs, one slot, always request, perfect uplink
        let mut c = cfg([2, 0, 0], 1, 1, 0, [1, 1, 1], 1.0, 0.5, [1.0; 4]);
        c.p = [1.0, 0.0, 0.0];
        let pi = SteadyStateDistribution {
            states: vec![SystemState::EMPTY],
            pi: vec![1.0],
            residual: 0.0,
        };
        assert!((collision(&pi, &c, Group::One).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn demand_below_capacity_never_blocks() {
        let c = cfg([3, 0, 0], 3, 1, 0, [2, 1, 1], 0.7, 0.2, [0.9; 4]);
        let r = evaluate(&solve(&c), &c).unwrap();
        assert!(r.b[0].abs() < 1e-15);
        let c = cfg([0, 0, 4], 2, 2, 2, [1, 1, 3], 0.7, 0.2, [0.9; 4]);
        let r = evaluate(&solve(&c), &c).unwrap();
        assert!(r.b[2].abs() < 1e-15);
    }

    #[test]
    fn two_state_utilization() {
        // one UE, one channel: pi_1 = w p / (w p + l)
        let (p, w, q) = (0.3, 0.8, 0.25);
        let mut c = cfg([1, 0, 0], 1, 1, 0, [1, 1, 1], p, q, [w; 4]);
        c.p = [p, 0.0, 0.0];
        let l = 1.0 - w + w * q;
        let pi1 = w * p / (w * p + l);
        let (u, thr) = utilization(&solve(&c), &c);
        assert!((u * 2.0 - pi1).abs() < 1e-12);
        assert!((thr - u * 2.0 * c.h).abs() < 1e-9);
    }

    #[test]
    fn home_blocking_two_ues_one_channel() {
        // N_1 = 2, M_1 = 1, one slot: only a lone requester succeeds, so
        // blocking needs the channel held and the idle UE to succeed
        let (p, w, q) = (0.6, 0.9, 0.3);
        let mut c = cfg([2, 0, 0], 1, 1, 0, [1, 1, 1], p, q, [w; 4]);
        c.p = [p, 0.0, 0.0];
        let pi = solve(&c);
        let l = 1.0 - w + w * q;
        // from (1): the connection stays (1 - l) and the idle UE succeeds (w p)
        let expected = pi.prob(&SystemState::new(1, 0, 0, 0)) * (1.0 - l) * w * p;
        let b = blocking_home(&pi, &c, Group::One).unwrap();
        assert!((b - expected).abs() < 1e-12);
    }

    #[test]
    fn g_functions() {
        assert_eq!(g_a(3, 1, 1, 0, 0, 5), 1);
        assert_eq!(g_a(3, 1, 1, 1, 0, 1), 1);
        assert_eq!(g_e(3, 1, 1, 0, 0, 3), -2);
        assert_eq!(g_c(2, 1, 0, -2), 0);
        assert_eq!(g_c(2, 1, 0, 3), 1);
        assert_eq!(g_c(2, 1, 1, 3), 2);
    }
}
