use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors of the command-line harness. Each maps to a process exit code via
/// [`HarnessError::exit_code`].
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read config {path}: {source}")]
    ConfigRead { path: PathBuf, source: io::Error },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("config schema error: {0}")]
    Schema(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid benchmark: {0}")]
    InvalidBenchmark(String),

    #[error(transparent)]
    Core(#[from] delaymca_core::Error),

    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_RESOURCE_CAP: i32 = 3;
pub const EXIT_IO: i32 = 4;
/// A run that completed but whose check did not hold (study convergence
/// predicate, pathological demonstration).
pub const EXIT_CHECK_FAILED: i32 = 5;

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(delaymca_core::Error::KernelInfeasible { .. }) => EXIT_INFEASIBLE,
            Self::Core(delaymca_core::Error::ResourceCap { .. }) => EXIT_RESOURCE_CAP,
            Self::Io { .. } | Self::Csv { .. } => EXIT_IO,
            _ => EXIT_CONFIG,
        }
    }

    /// Stable identifier of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::ConfigRead { .. } => "config-read",
            Self::Parse(_) => "parse",
            Self::Schema(_) => "schema",
            Self::InvalidParams(_) => "invalid-params",
            Self::InvalidBenchmark(_) => "invalid-benchmark",
            Self::Core(delaymca_core::Error::KernelInfeasible { .. }) => "kernel-infeasible",
            Self::Core(delaymca_core::Error::ResourceCap { .. }) => "resource-cap",
            Self::Core(_) => "solver",
            Self::Io { .. } | Self::Csv { .. } => "io",
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
