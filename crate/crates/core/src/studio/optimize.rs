use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{analyze, monte_carlo, AnalyticalSettings, Engine, SimSettings};
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::scenario::ScenarioConfig;

/// Per-group ceilings on blocking (`b`) and collision (`d`) probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConstraints {
    pub b_targets: [f64; 3],
    pub d_targets: [f64; 3],
}

impl OptimizerConstraints {
    pub const VACUOUS: Self = Self {
        b_targets: [1.0; 3],
        d_targets: [1.0; 3],
    };

    pub fn validate(&self) -> Result<()> {
        if self.b_targets.iter().chain(&self.d_targets).all(|t| (0.0..=1.0).contains(t)) {
            Ok(())
        } else {
            Err(Error::Validation("QoS targets must lie in [0, 1]".into()))
        }
    }

    /// Human-readable list of violated targets.
    pub fn violations(&self, r: &MetricsReport) -> Vec<String> {
        let mut v = Vec::new();
        for g in 0..3 {
            if r.b[g] > self.b_targets[g] {
                v.push(format!("B{} = {:.6} > {}", g + 1, r.b[g], self.b_targets[g]));
            }
            if r.d[g] > self.d_targets[g] {
                v.push(format!("D{} = {:.6} > {}", g + 1, r.d[g], self.d_targets[g]));
            }
        }
        v
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KCandidate {
    pub k: u32,
    pub report: MetricsReport,
    /// `U / K`.
    pub objective: f64,
    pub feasible: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeReport {
    /// Metrics with no shared channels.
    pub baseline: MetricsReport,
    pub candidates: Vec<KCandidate>,
    /// Feasible `K` with the largest `U / K`, smallest `K` on ties.
    pub best: Option<u32>,
    pub infeasible: bool,
}

impl OptimizeReport {
    pub fn best_candidate(&self) -> Option<&KCandidate> {
        self.best.map(|k| &self.candidates[k as usize - 1])
    }
}

/// Exhaustive search of `K` in `1..=M_2` maximizing `U / K` under the
/// blocking and collision targets.
pub fn optimize_k(
    cfg: &ScenarioConfig,
    constraints: &OptimizerConstraints,
    engine: Engine,
    analytical: &AnalyticalSettings,
    sim: &SimSettings,
) -> Result<OptimizeReport> {
    cfg.validate()?;
    constraints.validate()?;
    let eval = |k: u32| -> Result<MetricsReport> {
        let c = ScenarioConfig { k, ..cfg.clone() };
        if engine.analytical() {
            Ok(analyze(&c, analytical)?.1)
        } else {
            monte_carlo(&c, sim)
        }
    };
    let reports = (0..=cfg.m2).into_par_iter().map(eval).collect::<Result<Vec<_>>>()?;
    let candidates: Vec<KCandidate> = reports[1..]
        .iter()
        .zip(1u32..)
        .map(|(r, k)| {
            let violations = constraints.violations(r);
            KCandidate {
                k,
                report: *r,
                objective: r.u / k as f64,
                feasible: violations.is_empty(),
                violations,
            }
        })
        .collect();
    let mut best: Option<&KCandidate> = None;
    for c in candidates.iter().filter(|c| c.feasible) {
        if best.is_none_or(|b| c.objective > b.objective) {
            best = Some(c);
        }
    }
    let best = best.map(|c| c.k);
    Ok(OptimizeReport {
        baseline: reports[0],
        infeasible: best.is_none(),
        best,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Links;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig {
            n: [3, 3, 4],
            m1: 2,
            m2: 3,
            k: 0,
            l: [2, 2, 3],
            p: [0.5; 3],
            q: 0.2,
            h: 100.0,
            links: Links::uniform(0.9),
        }
    }

    fn run(c: &OptimizerConstraints) -> OptimizeReport {
        optimize_k(&cfg(), c, Engine::Analytical, &AnalyticalSettings::default(), &SimSettings::default()).unwrap()
    }

    #[test]
    fn vacuous_targets_pick_best_ratio() {
        let r = run(&OptimizerConstraints::VACUOUS);
        assert_eq!(r.candidates.len(), 3);
        let top = r
            .candidates
            .iter()
            .map(|c| c.objective)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.best_candidate().unwrap().objective, top);
        assert!(!r.infeasible);
    }

    #[test]
    fn zero_targets_infeasible() {
        let r = run(&OptimizerConstraints {
            b_targets: [0.0; 3],
            d_targets: [0.0; 3],
        });
        assert!(r.infeasible);
        assert!(r.best.is_none());
        assert!(r.candidates.iter().all(|c| !c.violations.is_empty()));
    }

    #[test]
    fn feasible_set_shrinks_with_tighter_targets() {
        let loose = run(&OptimizerConstraints::VACUOUS);
        let b3 = loose.candidates[1].report.b[2];
        let tight = run(&OptimizerConstraints {
            b_targets: [1.0, 1.0, b3],
            d_targets: [1.0; 3],
        });
        for (l, t) in loose.candidates.iter().zip(&tight.candidates) {
            assert!(l.feasible || !t.feasible);
        }
        assert!(!tight.candidates[0].feasible);
    }

    #[test]
    fn rejects_bad_targets() {
        let c = OptimizerConstraints {
            b_targets: [1.5, 0.0, 0.0],
            d_targets: [0.0; 3],
        };
        assert!(optimize_k(&cfg(), &c, Engine::Analytical, &AnalyticalSettings::default(), &SimSettings::default()).is_err());
    }
}
