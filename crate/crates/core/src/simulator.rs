//! Frame-level Monte Carlo simulation.
//!
//! Every UE is simulated individually: idle UEs request with probability
//! `p_x` and pick a slot uniformly, each group shares one uplink draw per
//! frame, and every connection terminates independently when its downlink is
//! bad or its transfer completes. Admission goes through [`crate::frame`].
//!
//! Replication `r` uses `ChaCha8Rng::seed_from_u64(seed)` switched to stream
//! `r`, so replications are independent and results do not depend on thread
//! scheduling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::chain::{enumerate_states, SteadyStateDistribution, SystemState};
use crate::error::{Error, Result};
use crate::frame::{admit, collided};
use crate::metrics::{MetricsReport, MetricsStderr, Source};
use crate::scenario::{Group, LinkId, ScenarioConfig};

#[derive(Debug, Clone, Serialize)]
pub struct SimRun {
    #[serde(skip)]
    pub cfg: ScenarioConfig,
    pub seed: u64,
    pub warmup_frames: u64,
    pub measure_frames: u64,
    pub replications: u32,
}

impl SimRun {
    pub const DEFAULT_WARMUP: u64 = 10_000;
    pub const DEFAULT_FRAMES: u64 = 1_000_000;
    pub const DEFAULT_REPLICATIONS: u32 = 10;

    pub fn new(cfg: ScenarioConfig, seed: u64) -> Self {
        Self {
            cfg,
            seed,
            warmup_frames: Self::DEFAULT_WARMUP,
            measure_frames: Self::DEFAULT_FRAMES,
            replications: Self::DEFAULT_REPLICATIONS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.measure_frames == 0 || self.replications == 0 {
            return Err(Error::Validation(
                "measure_frames and replications must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimEstimate {
    pub run: SimRun,
    pub report: MetricsReport,
    /// Blocked requests over RACH-successful requests, per group.
    pub request_blocking: [f64; 3],
    #[serde(serialize_with = "histogram_as_list")]
    pub histogram: BTreeMap<SystemState, u64>,
}

fn histogram_as_list<S: Serializer>(h: &BTreeMap<SystemState, u64>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry {
        a: u32,
        b: u32,
        c: u32,
        d: u32,
        frames: u64,
    }
    ser.collect_seq(h.iter().map(|(s, &n)| Entry {
        a: s.a,
        b: s.b,
        c: s.c,
        d: s.d,
        frames: n,
    }))
}

/// Counters from one replication.
#[derive(Debug, Clone, Default)]
struct Tally {
    frames: u64,
    busy: u64,
    blocked_frames: [u64; 3],
    collided_frames: [u64; 3],
    successes: [u64; 3],
    blocked_requests: [u64; 3],
    histogram: BTreeMap<SystemState, u64>,
}

struct Frame<'a> {
    cfg: &'a ScenarioConfig,
    slots: Vec<u32>,
    w_down: [f64; 4],
}

impl<'a> Frame<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Self {
        let links = [LinkId::G1Bs1, LinkId::G3Bs1, LinkId::G3Bs2, LinkId::G2Bs2];
        Self {
            cfg,
            slots: vec![0; *cfg.l.iter().max().unwrap() as usize],
            w_down: links.map(|l| cfg.links.get(l).w_down),
        }
    }

    /// Requests and successes of one group from `idle` UEs.
    fn contend<R: Rng>(&mut self, rng: &mut R, g: Group, idle: u32) -> (bool, u32, u32) {
        let cfg = self.cfg;
        let good = rng.random_bool(cfg.access_link(g).w_up);
        let l = cfg.slots(g) as usize;
        let p = cfg.request_prob(g);
        let slots = &mut self.slots[..l];
        slots.iter_mut().for_each(|s| *s = 0);
        let mut requesters = 0;
        for _ in 0..idle {
            if rng.random_bool(p) {
                requesters += 1;
                slots[rng.random_range(0..l)] += 1;
            }
        }
        let singles = slots.iter().filter(|&&n| n == 1).count() as u32;
        (good, requesters, if good { singles } else { 0 })
    }

    /// Survivors among `n` connections on link slot `k`.
    fn survive<R: Rng>(&self, rng: &mut R, k: usize, n: u32) -> u32 {
        let mut kept = 0;
        for _ in 0..n {
            let ends = !rng.random_bool(self.w_down[k]) || rng.random_bool(self.cfg.q);
            if !ends {
                kept += 1;
            }
        }
        kept
    }

    fn step<R: Rng>(&mut self, rng: &mut R, s: SystemState, tally: Option<&mut Tally>) -> SystemState {
        let cfg = self.cfg;
        let [n1, n2, n3] = cfg.n;
        let (g1, r1, x1) = self.contend(rng, Group::One, n1 - s.a);
        let (g2, r2, x2) = self.contend(rng, Group::Two, n2 - s.d);
        let (g3, r3, x3) = self.contend(rng, Group::Three, n3 - s.b - s.c);
        let after = SystemState {
            a: self.survive(rng, 0, s.a),
            b: self.survive(rng, 1, s.b),
            c: self.survive(rng, 2, s.c),
            d: self.survive(rng, 3, s.d),
        };
        let out = admit(cfg, after, [x1, x2, x3]);
        debug_assert!(out.next.is_valid(cfg), "{} left the state space", out.next);
        if let Some(t) = tally {
            t.frames += 1;
            t.busy += s.total() as u64;
            *t.histogram.entry(s).or_insert(0) += 1;
            let admitted = [
                out.next.a - after.a,
                out.next.d - after.d,
                out.next.b + out.next.c - after.b - after.c,
            ];
            let succ = [x1, x2, x3];
            let col = [collided(g1, r1, x1), collided(g2, r2, x2), collided(g3, r3, x3)];
            for g in 0..3 {
                t.blocked_frames[g] += out.blocked[g] as u64;
                t.collided_frames[g] += col[g] as u64;
                t.successes[g] += succ[g] as u64;
                t.blocked_requests[g] += (succ[g] - admitted[g]) as u64;
            }
        }
        out.next
    }
}

fn replicate(run: &SimRun, rep: u32) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    rng.set_stream(rep as u64);
    let mut frame = Frame::new(&run.cfg);
    let mut s = SystemState::EMPTY;
    for _ in 0..run.warmup_frames {
        s = frame.step(&mut rng, s, None);
    }
    let mut t = Tally::default();
    for _ in 0..run.measure_frames {
        s = frame.step(&mut rng, s, Some(&mut t));
    }
    t
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Run all replications and aggregate in replication order.
pub fn simulate(run: &SimRun) -> Result<SimEstimate> {
    run.validate()?;
    let tallies: Vec<Tally> = (0..run.replications)
        .into_par_iter()
        .map(|r| replicate(run, r))
        .collect();
    let cfg = &run.cfg;
    let m = cfg.total_channels() as f64;
    let per_rep = |f: &dyn Fn(&Tally) -> f64| mean_se(&tallies.iter().map(f).collect::<Vec<_>>());
    let (u, u_se) = per_rep(&|t| t.busy as f64 / (t.frames as f64 * m));
    let mut b = [0.0; 3];
    let mut b_se = [0.0; 3];
    let mut d = [0.0; 3];
    let mut d_se = [0.0; 3];
    let mut request_blocking = [0.0; 3];
    for g in 0..3 {
        (b[g], b_se[g]) = per_rep(&|t| t.blocked_frames[g] as f64 / t.frames as f64);
        (d[g], d_se[g]) = per_rep(&|t| t.collided_frames[g] as f64 / t.frames as f64);
        let succ: u64 = tallies.iter().map(|t| t.successes[g]).sum();
        let blk: u64 = tallies.iter().map(|t| t.blocked_requests[g]).sum();
        request_blocking[g] = if succ == 0 { 0.0 } else { blk as f64 / succ as f64 };
    }
    let mut histogram = BTreeMap::new();
    for t in &tallies {
        for (s, n) in &t.histogram {
            *histogram.entry(*s).or_insert(0) += n;
        }
    }
    let scale = m * cfg.h;
    Ok(SimEstimate {
        run: run.clone(),
        report: MetricsReport {
            b,
            d,
            u,
            throughput: u * scale,
            source: Source::MonteCarlo,
            stderr: Some(MetricsStderr {
                b: b_se,
                d: d_se,
                u: u_se,
                throughput: u_se * scale,
            }),
        },
        request_blocking,
        histogram,
    })
}

/// Empirical occupancy distribution over the enumerated state order of `cfg`.
pub fn occupancy_to_pi(est: &SimEstimate, cfg: &ScenarioConfig) -> Result<SteadyStateDistribution> {
    let total: u64 = est.histogram.values().sum();
    if total == 0 {
        return Err(Error::Validation("empty occupancy histogram".into()));
    }
    let states = enumerate_states(cfg);
    let mut pi = vec![0.0; states.len()];
    for (s, &n) in &est.histogram {
        let i = states
            .binary_search(s)
            .map_err(|_| Error::Integrity(format!("simulated state {s} is outside the enumerated space")))?;
        pi[i] = n as f64 / total as f64;
    }
    Ok(SteadyStateDistribution {
        states,
        pi,
        residual: f64::NAN,
    })
}

/// Total-variation distance between two distributions over the same states.
pub fn total_variation(p: &SteadyStateDistribution, q: &SteadyStateDistribution) -> Result<f64> {
    if p.states != q.states {
        return Err(Error::Integrity("distributions are over different state lists".into()));
    }
    Ok(0.5 * p.pi.iter().zip(&q.pi).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Links;

    fn cfg(n: [u32; 3], p: f64) -> ScenarioConfig {
        ScenarioConfig {
            n,
            m1: 2,
            m2: 2,
            k: 1,
            l: [2, 2, 3],
            p: [p; 3],
            q: 0.2,
            h: 1.0,
            links: Links::uniform(0.9),
        }
    }

    fn short(c: ScenarioConfig, seed: u64) -> SimRun {
        SimRun {
            warmup_frames: 100,
            measure_frames: 5_000,
            replications: 3,
            ..SimRun::new(c, seed)
        }
    }

    #[test]
    fn reproducible() {
        let a = simulate(&short(cfg([3, 3, 3], 0.5), 7)).unwrap();
        let b = simulate(&short(cfg([3, 3, 3], 0.5), 7)).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.histogram, b.histogram);
        let c = simulate(&short(cfg([3, 3, 3], 0.5), 8)).unwrap();
        assert_ne!(a.histogram, c.histogram);
    }

    #[test]
    fn histogram_counts_every_frame() {
        let e = simulate(&short(cfg([3, 3, 3], 0.5), 1)).unwrap();
        assert_eq!(e.histogram.values().sum::<u64>(), 15_000);
        let se = e.report.stderr.unwrap();
        assert!(se.b.iter().chain(&se.d).all(|&x| x >= 0.0));
    }

    #[test]
    fn idle_network() {
        let c = cfg([3, 3, 3], 0.0);
        let e = simulate(&short(c.clone(), 3)).unwrap();
        assert_eq!(e.report.u, 0.0);
        assert_eq!(e.report.b, [0.0; 3]);
        assert_eq!(e.report.d, [0.0; 3]);
        let pi = occupancy_to_pi(&e, &c).unwrap();
        assert_eq!(pi.prob(&SystemState::EMPTY), 1.0);
    }

    #[test]
    fn foreign_state_is_integrity_error() {
        let e = simulate(&short(cfg([3, 3, 3], 0.7), 3)).unwrap();
        let small = ScenarioConfig {
            n: [1, 1, 0],
            k: 0,
            ..cfg([1, 1, 0], 0.7)
        };
        assert!(matches!(occupancy_to_pi(&e, &small), Err(Error::Integrity(_))));
    }

    #[test]
    fn rejects_empty_run() {
        let mut r = short(cfg([3, 3, 3], 0.5), 0);
        r.replications = 0;
        assert!(simulate(&r).is_err());
    }
}
