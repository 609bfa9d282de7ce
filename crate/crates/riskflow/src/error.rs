use std::path::PathBuf;

use riskflow_core::RiskError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code: 3 for numeric failures, 2 for bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Risk(RiskError::Numeric(_) | RiskError::Bracket(_) | RiskError::Internal(_)) => 3,
            _ => 2,
        }
    }
}
