//! Channel-occupancy Markov chain: state space, transition matrix (two
//! independent builders) and steady-state solver.

mod closed_form;
mod enumeration;
pub mod export;
mod matrix;
mod solver;
mod states;

pub use closed_form::{build_closed_form, build_closed_form_with_budget, classify, CaseId, ClosedForm};
pub use enumeration::{build_enumeration, build_enumeration_with_budget};
pub use matrix::{Backend, TransitionMatrix, DENSE_LIMIT, ROW_SUM_TOL};
pub use solver::{closed_classes, steady_state, SolveOptions, SteadyStateDistribution};
pub use states::{enumerate_states, StateIndex, SystemState};

use crate::error::Result;
use crate::scenario::ScenarioConfig;

/// Largest state space built without an explicit override.
pub const DEFAULT_STATE_BUDGET: usize = 20_000;

/// Build the matrix with the chosen backend.
pub fn build(cfg: &ScenarioConfig, backend: Backend) -> Result<TransitionMatrix> {
    match backend {
        Backend::ClosedForm => build_closed_form(cfg),
        Backend::Enumeration => build_enumeration(cfg),
    }
}

/// Sparse `(column, value)` list of the nonzero entries of a dense row.
pub(crate) fn compress_row(buf: &[f64]) -> Vec<(u32, f64)> {
    buf.iter()
        .enumerate()
        .filter(|&(_, &v)| v != 0.0)
        .map(|(j, &v)| (j as u32, v))
        .collect()
}
