//! Experiment harness for `papa-core`: JSON experiment configs, CSV traces,
//! JSON summaries with rate fits and bound checks.

pub mod config;
pub mod instance;
pub mod output;
pub mod runner;

use std::path::PathBuf;

pub use config::{ExperimentConfig, SolverEntry, SolverMethod};
pub use instance::{prepare, Prepared, ReferenceKind};
pub use runner::{run_experiment, run_on, ExperimentOutput, SolverRun};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] papa_core::Error),
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
