//! Std companion to `advdiff-core`: JSON run configs, CSV output, parallel
//! assembly and grid evaluation, and the `advdiff` command.
//!
//! A run is `config -> run::execute -> Vec<Artifact>`; the binary writes the
//! artifacts and maps [`CliError`] to the exit status.

use std::fmt;

pub mod config;
pub mod output;
pub mod parallel;
pub mod run;

pub use config::RunConfig;
pub use run::{execute, Artifact, Outcome};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "ADVDIFF_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed or inconsistent configuration (exit 2).
    Config(String),
    /// Numerical failure with per-entry diagnostics (exit 3).
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }

    /// Classifies a core error raised while building a problem: parameter
    /// and spec errors belong to the config.
    pub fn from_setup(e: advdiff_core::Error) -> Self {
        use advdiff_core::Error as E;
        match e {
            E::InvalidParams(_) | E::InvalidSpec(_) | E::NeumannNotAllowed => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<advdiff_core::Error> for CliError {
    fn from(e: advdiff_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
