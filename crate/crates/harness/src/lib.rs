//! Batch front-end for the optimizer: single runs, parameter sweeps and the
//! property validation suites. The `fasopt` binary is a thin argument parser
//! over these functions.

pub mod format;
pub mod run;
pub mod sweep;
pub mod validate;
pub mod workers;

use std::path::PathBuf;

use fasopt_core::bcd::BcdError;
use fasopt_core::config::ConfigError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error(transparent)]
    Override(#[from] ConfigError),
    #[error(transparent)]
    Optimizer(#[from] BcdError),
    #[error("invalid sweep: {0}")]
    Sweep(String),
    #[error("FASOPT_WORKERS: {0}")]
    Workers(String),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
