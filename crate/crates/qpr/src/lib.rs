//! Instance files, JSON Lines reports, trial sweeps, invariant self-tests and
//! the `qpr` command line on top of [`qpr_core`].

pub mod commands;
pub mod instance;
pub mod report;
pub mod selftest;
pub mod sweep;

use thiserror::Error;

pub use instance::{load_instance, Instance, InstanceError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Core(#[from] qpr_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}
