use std::path::PathBuf;

use ratioci::ratio::Method;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },
    #[error("method {method}: {source}")]
    Method { method: Method, source: ratioci::Error },
    #[error("{0}")]
    Compute(ratioci::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn input(path: &std::path::Path, message: impl ToString) -> Self {
        CliError::Input { path: path.to_path_buf(), message: message.to_string() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } | CliError::Io(_) => 2,
            CliError::Method { .. } | CliError::Compute(_) => 3,
        }
    }
}

impl From<ratioci::Error> for CliError {
    fn from(e: ratioci::Error) -> Self {
        match e {
            ratioci::Error::InvalidParameter(msg) => CliError::Usage(msg),
            other => CliError::Compute(other),
        }
    }
}
