use serde::Serialize;

use super::engine::SimSettings;
use crate::chain::{
    build_closed_form, build_enumeration, steady_state, CaseId, ClosedForm, SolveOptions, SteadyStateDistribution,
    SystemState, ROW_SUM_TOL,
};
use crate::error::Result;
use crate::metrics::{evaluate, MetricsReport};
use crate::scenario::{Links, ScenarioConfig};
use crate::simulator::{occupancy_to_pi, simulate, total_variation};

/// Entrywise tolerance between the two matrix builders and their solutions.
pub const BACKEND_TOL: f64 = 1e-9;
/// Tolerance of the structural symmetry checks on `pi`.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Monte Carlo agreement band, in standard errors.
pub const SE_BAND: f64 = 3.0;
/// Largest accepted total-variation distance between simulated and
/// analytical occupancy.
pub const TV_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// One transition where the two builders disagree.
#[derive(Debug, Clone, Serialize)]
pub struct Discrepancy {
    pub origin: SystemState,
    pub destination: SystemState,
    pub case: CaseId,
    pub closed_form: f64,
    pub enumeration: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub states: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub ledger: Vec<Discrepancy>,
    pub analytical: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_distance: Option<f64>,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// With no shared channels the two cells evolve independently, so `pi`
/// is the product of its cell marginals. Returns the largest deviation.
pub fn factorization_error(pi: &SteadyStateDistribution) -> f64 {
    use std::collections::HashMap;
    let mut cell1: HashMap<(u32, u32), f64> = HashMap::new();
    let mut cell2: HashMap<u32, f64> = HashMap::new();
    for (s, &p) in pi.states.iter().zip(&pi.pi) {
        *cell1.entry((s.a, s.b)).or_default() += p;
        *cell2.entry(s.d).or_default() += p;
    }
    let mut worst: f64 = 0.0;
    for (&(a, b), &p1) in &cell1 {
        for (&d, &p2) in &cell2 {
            let joint = pi.prob(&SystemState::new(a, b, 0, d));
            worst = worst.max((joint - p1 * p2).abs());
        }
    }
    worst
}

/// The scenario with groups 1 and 2 (and their cells) exchanged. Only
/// meaningful without group 3.
pub fn swap_cells(cfg: &ScenarioConfig) -> ScenarioConfig {
    ScenarioConfig {
        n: [cfg.n[1], cfg.n[0], cfg.n[2]],
        m1: cfg.m2,
        m2: cfg.m1,
        k: cfg.k.min(cfg.m1),
        l: [cfg.l[1], cfg.l[0], cfg.l[2]],
        p: [cfg.p[1], cfg.p[0], cfg.p[2]],
        q: cfg.q,
        h: cfg.h,
        links: Links {
            w_11: cfg.links.w_22,
            w_31: cfg.links.w_31,
            w_32: cfg.links.w_32,
            w_22: cfg.links.w_11,
        },
    }
}

/// Largest `|pi(a, 0, 0, d) - pi'(d, 0, 0, a)|` against the swapped scenario.
pub fn swap_error(cfg: &ScenarioConfig, pi: &SteadyStateDistribution) -> Result<f64> {
    let swapped = swap_cells(cfg);
    let m = build_enumeration(&swapped)?;
    let pi2 = steady_state(&m, SolveOptions::default())?;
    Ok(pi
        .states
        .iter()
        .zip(&pi.pi)
        .map(|(s, &p)| (p - pi2.prob(&SystemState::new(s.d, 0, 0, s.a))).abs())
        .fold(0.0, f64::max))
}

fn agreement(name: &str, a: f64, m: f64, se: f64) -> Check {
    let band = (SE_BAND * se).max(1e-12);
    Check::new(
        format!("monte-carlo {name}"),
        (a - m).abs() <= band,
        format!("analytical {a:.6}, simulated {m:.6} +- {se:.2e} (|diff| = {:.2} SE)", (a - m).abs() / se.max(f64::MIN_POSITIVE)),
    )
}

/// Build both matrices, compare them and their solutions, run the
/// structural checks that apply, and compare against Monte Carlo when
/// `sim` is given. Failures are report content, not errors.
pub fn validate(cfg: &ScenarioConfig, sim: Option<&SimSettings>) -> Result<ValidationReport> {
    let cf = build_closed_form(cfg)?;
    let en = build_enumeration(cfg)?;
    let mut checks = Vec::new();
    for m in [&cf, &en] {
        let dev = m.max_row_deviation();
        checks.push(Check::new(
            format!("{} row sums", m.backend),
            dev <= ROW_SUM_TOL,
            format!("max |row sum - 1| = {dev:.3e}"),
        ));
    }

    let eval = ClosedForm::new(cfg);
    let mut ledger = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..cf.len() {
        for j in 0..cf.len() {
            let (x, y) = (cf.get(i, j), en.get(i, j));
            let d = (x - y).abs();
            worst = worst.max(d);
            if d > BACKEND_TOL {
                let (case, _) = eval.probability(&cf.states[i], &cf.states[j])?;
                ledger.push(Discrepancy {
                    origin: cf.states[i],
                    destination: cf.states[j],
                    case,
                    closed_form: x,
                    enumeration: y,
                });
            }
        }
    }
    checks.push(Check::new(
        "backend matrices agree",
        ledger.is_empty(),
        format!("max |diff| = {worst:.3e}, {} entries over {BACKEND_TOL:e}", ledger.len()),
    ));

    let opts = SolveOptions::default();
    let pi_cf = steady_state(&cf, opts)?;
    let pi_en = steady_state(&en, opts)?;
    let dpi = max_abs_diff(&pi_cf.pi, &pi_en.pi);
    checks.push(Check::new(
        "backend stationary distributions agree",
        dpi <= BACKEND_TOL,
        format!("max |diff| = {dpi:.3e}"),
    ));
    checks.push(Check::new(
        "solver residual",
        pi_cf.residual <= opts.tol,
        format!("||pi P - pi||_inf = {:.3e}", pi_cf.residual),
    ));

    if cfg.k == 0 {
        let e = factorization_error(&pi_cf);
        checks.push(Check::new(
            "no-sharing product form",
            e <= SYMMETRY_TOL,
            format!("max |pi - pi_1 pi_2| = {e:.3e}"),
        ));
    }
    if cfg.n[2] == 0 {
        let e = swap_error(cfg, &pi_cf)?;
        checks.push(Check::new(
            "cell exchange invariance",
            e <= SYMMETRY_TOL,
            format!("max |pi(a,0,0,d) - pi_swapped(d,0,0,a)| = {e:.3e}"),
        ));
    }

    let analytical = evaluate(&pi_cf, cfg)?;
    let (mut monte_carlo, mut tv_distance) = (None, None);
    if let Some(sim) = sim {
        let est = simulate(&sim.run(cfg))?;
        let r = est.report;
        let se = r.stderr.expect("monte carlo reports carry standard errors");
        checks.push(agreement("U", analytical.u, r.u, se.u));
        for g in 0..3 {
            checks.push(agreement(&format!("B{}", g + 1), analytical.b[g], r.b[g], se.b[g]));
            checks.push(agreement(&format!("D{}", g + 1), analytical.d[g], r.d[g], se.d[g]));
        }
        let tv = total_variation(&occupancy_to_pi(&est, cfg)?, &pi_cf)?;
        checks.push(Check::new(
            "occupancy total variation",
            tv < TV_LIMIT,
            format!("TV(simulated, analytical) = {tv:.4}"),
        ));
        monte_carlo = Some(r);
        tv_distance = Some(tv);
    }

    Ok(ValidationReport {
        states: cf.len(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        ledger,
        analytical,
        monte_carlo,
        tv_distance,
    })
}
