use std::path::Path;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(lyrik::Error),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            CliError::Data(_) | CliError::Output { .. } => ExitCode::from(2),
            CliError::Numeric(_) => ExitCode::from(3),
        }
    }

    pub fn output(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Output {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

impl From<lyrik::Error> for CliError {
    fn from(e: lyrik::Error) -> Self {
        match e {
            lyrik::Error::NonFinite(m) => CliError::Numeric(m),
            lyrik::Error::InvalidConfig(m) => CliError::Usage(m),
            other => CliError::Data(other),
        }
    }
}
