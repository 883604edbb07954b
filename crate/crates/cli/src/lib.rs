//! Experiment runner for the `ceeat` binary.
//!
//! A run reads a TOML config, dispatches to `ceeat-core`, writes CSV and
//! JSON outputs atomically and finishes with a `manifest.json` listing the
//! SHA-256 of every output.

pub mod config;
pub mod output;
pub mod run;

use std::io;

use thiserror::Error;

pub use config::{ExperimentConfig, ExperimentKind, ExperimentParams, Overrides};
pub use run::{run_experiment, RunManifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{experiment}: {source}")]
    Core {
        experiment: ExperimentKind,
        source: ceeat_core::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("invariant check failed: {0}")]
    Invariant(String),
}

impl CliError {
    /// Process exit status: 2 for failed invariant checks, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant(_) => 2,
            _ => 1,
        }
    }
}
