use std::process::ExitCode;

use thiserror::Error;

/// Failures, each mapped onto one of the documented exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, configuration or input files.
    #[error("{0}")]
    Input(String),

    /// A check ran to completion and failed, or a search ran out of budget.
    #[error("{0}")]
    CheckFailed(String),

    /// A simulation stopped before its final time.
    #[error("{0}")]
    Aborted(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Input(_) => 2,
            CliError::CheckFailed(_) => 3,
            CliError::Aborted(_) => 4,
        })
    }
}

impl From<mocpde::Error> for CliError {
    fn from(e: mocpde::Error) -> Self {
        use mocpde::Error as E;
        match e {
            E::Diverged { .. } => CliError::Aborted(e.to_string()),
            E::Quadrature { .. } | E::DivergentTail(_) => CliError::CheckFailed(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
