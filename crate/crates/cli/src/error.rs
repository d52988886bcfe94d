use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sn_core::Error),
    #[error("{0}")]
    BadInput(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("output failed: {0}")]
    Output(String),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use sn_core::Error as E;
        match self {
            CliError::Core(E::NoBracket { .. } | E::InvalidBracket { .. }) => 3,
            CliError::Core(E::NotConverged(_) | E::WrongState { .. }) => 4,
            CliError::Core(E::StepRejected { .. }) => 5,
            CliError::Core(_) | CliError::BadInput(_) | CliError::Io { .. } | CliError::Output(_) => 2,
            CliError::ChecksFailed(_) => 1,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::BadInput(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
