//! Experiment harness for the parabox solvers: JSON run configurations,
//! bundled experiment presets, CSV/JSON artifact writing, and post-run
//! invariant checks.
//!
//! One experiment = one objective + one solver + output paths. Experiments
//! are described by a single JSON document (see [`config::ExperimentConfig`]);
//! command-line flags override JSON fields, and the `PARABOX_OUT` environment
//! variable supplies a fallback output directory. Identical configs and
//! seeds produce byte-identical CSV artifacts.

pub mod config;
pub mod experiment;
pub mod presets;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invariant checks failed")]
    ChecksFailed,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Solver(#[from] parabox::SolverError),
    #[error(transparent)]
    Zogd(#[from] parabox::ZogdError),
    #[error(transparent)]
    Oracle(#[from] parabox::OracleError),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 1 for runtime
    /// failures (solver errors, I/O).
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            _ => 1,
        }
    }
}

pub use config::{ExperimentConfig, SolverSpec};
pub use experiment::{run_experiment, ExperimentOutcome, InvariantCheck, RunSummary, TraceData};
pub use presets::{expand_preset, list_presets, PresetInfo};
