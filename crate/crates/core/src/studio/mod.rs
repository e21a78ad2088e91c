//! Experiment orchestration: sweeps, figure presets, the shared-pool
//! optimizer and cross-validation reports.

mod engine;
mod optimize;
pub mod presets;
mod sweep;
mod validate;

pub use engine::{analyze, monte_carlo, AnalyticalSettings, Engine, SimSettings};
pub use optimize::{optimize_k, KCandidate, OptimizeReport, OptimizerConstraints};
pub use sweep::{sweep, write_tables_csv, Axis, KDiagnostics, SweepRow, SweepSpec, SweepSpecDoc, SweepTable};
pub use validate::{validate, Check, Discrepancy, ValidationReport};
