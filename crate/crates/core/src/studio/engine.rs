use serde::{Deserialize, Serialize};

use crate::chain::{build_closed_form_with_budget, build_enumeration_with_budget, steady_state, Backend, SolveOptions, SteadyStateDistribution, DEFAULT_STATE_BUDGET};
use crate::error::Result;
use crate::metrics::{evaluate, MetricsReport};
use crate::scenario::ScenarioConfig;
use crate::simulator::{simulate, SimRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    #[default]
    Analytical,
    MonteCarlo,
    Both,
}

impl Engine {
    pub fn analytical(self) -> bool {
        matches!(self, Engine::Analytical | Engine::Both)
    }

    pub fn monte_carlo(self) -> bool {
        matches!(self, Engine::MonteCarlo | Engine::Both)
    }
}

/// Monte Carlo settings carried by sweeps and validation runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    pub seed: u64,
    pub warmup_frames: u64,
    pub measure_frames: u64,
    pub replications: u32,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            seed: 1,
            warmup_frames: SimRun::DEFAULT_WARMUP,
            measure_frames: SimRun::DEFAULT_FRAMES,
            replications: SimRun::DEFAULT_REPLICATIONS,
        }
    }
}

impl SimSettings {
    pub fn run(&self, cfg: &ScenarioConfig) -> SimRun {
        SimRun {
            cfg: cfg.clone(),
            seed: self.seed,
            warmup_frames: self.warmup_frames,
            measure_frames: self.measure_frames,
            replications: self.replications,
        }
    }
}

/// Matrix backend, solver tolerance and state budget for analytical runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyticalSettings {
    pub backend: Backend,
    pub tol: f64,
    pub max_iter: usize,
    pub state_budget: usize,
}

impl Default for AnalyticalSettings {
    fn default() -> Self {
        let s = SolveOptions::default();
        Self {
            backend: Backend::ClosedForm,
            tol: s.tol,
            max_iter: s.max_iter,
            state_budget: DEFAULT_STATE_BUDGET,
        }
    }
}

/// Build, solve and evaluate.
pub fn analyze(cfg: &ScenarioConfig, opts: &AnalyticalSettings) -> Result<(SteadyStateDistribution, MetricsReport)> {
    let m = match opts.backend {
        Backend::ClosedForm => build_closed_form_with_budget(cfg, opts.state_budget)?,
        Backend::Enumeration => build_enumeration_with_budget(cfg, opts.state_budget)?,
    };
    let pi = steady_state(
        &m,
        SolveOptions {
            tol: opts.tol,
            max_iter: opts.max_iter,
        },
    )?;
    let report = evaluate(&pi, cfg)?;
    Ok((pi, report))
}

pub fn monte_carlo(cfg: &ScenarioConfig, sim: &SimSettings) -> Result<MetricsReport> {
    Ok(simulate(&sim.run(cfg))?.report)
}
