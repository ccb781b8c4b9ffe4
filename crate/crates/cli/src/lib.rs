//! Harness around the Carleman lattice-Boltzmann engines: experiment
//! configuration, run directories, comparisons, Taylor–Green grids and the
//! cost-model report.

pub mod compare;
pub mod config;
pub mod cost_report;
pub mod output;
pub mod run;
pub mod tgv;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("tolerance exceeded: {0}")]
    Tolerance(String),

    #[error(transparent)]
    Numeric(#[from] qlbm_core::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// 0 pass, 1 tolerance failure, 2 usage, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Tolerance(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric(qlbm_core::Error::InvalidParameter { .. } | qlbm_core::Error::NotPowerOfTwo(_)) => 2,
            CliError::Numeric(_) | CliError::Io { .. } => 3,
        }
    }
}
