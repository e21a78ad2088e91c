use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// The scenario document could not be parsed; `path` is the offending field.
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    /// A configuration value violates one of its invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// An input lies outside the domain of a model.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation would exceed a configured size budget.
    #[error("capacity error: {what} needs {needed}, budget is {budget}")]
    Capacity {
        what: &'static str,
        needed: u64,
        budget: u64,
    },

    /// The closed-form transition dispatch found no case for a pair of states.
    #[error("coverage error: no transition case for {origin} -> {destination}")]
    Coverage { origin: String, destination: String },

    /// A computed object failed a structural self-check.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// Iterative solver stopped before reaching tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// The chain has more than one closed communicating class.
    #[error("structural error: chain has {closed_classes} closed classes")]
    Structural { closed_classes: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
