use std::path::PathBuf;

use thiserror::Error;

use crate::mtx::ReadError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("writing output: {0}")]
    Output(String),
    #[error(transparent)]
    Solver(#[from] inr_opt_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for usage, input and other failures, 2 when an iteration gave up, 3 when a result
    /// failed its own verification.
    pub fn exit_code(&self) -> u8 {
        use inr_opt_core::Error as E;
        match self {
            Self::Solver(E::ConvergenceFailure(_) | E::ReducedSolveFailure(_)) => 2,
            Self::Solver(E::VerificationFailure(_)) => 3,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
