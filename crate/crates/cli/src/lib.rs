//! Experiment runner for `adaptvqe`: reads a TOML experiment description,
//! runs one mode against a checked-in FCIDUMP fixture and writes CSV tables
//! plus a `metadata.json` sidecar.

pub mod config;
pub mod experiment;
pub mod fixtures;
pub mod output;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{ExperimentConfig, Mode};
pub use experiment::{run, RunSummary};
pub use fixtures::{verify_fixtures, VerifyReport};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("fixture error: {0}")]
    Fixture(String),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", .path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Problem(#[from] adaptvqe::problem::ProblemError),
    #[error(transparent)]
    Oracle(#[from] adaptvqe::oracle::OracleError),
    #[error(transparent)]
    Adapt(#[from] adaptvqe::adapt::AdaptError),
    #[error(transparent)]
    Landscape(#[from] adaptvqe::landscape::LandscapeError),
}
