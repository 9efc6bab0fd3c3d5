use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numeric failure: {0}")]
    Numeric(#[from] lossgeom::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl RunError {
    /// Process exit code: 1 for usage and configuration problems, 2 for
    /// numeric failures during a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::Config(_) | RunError::Io { .. } => 1,
            RunError::Numeric(_) | RunError::Invariant(_) => 2,
        }
    }

    pub(crate) fn config(err: impl std::fmt::Display) -> Self {
        RunError::Config(err.to_string())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io { path: path.into(), source }
    }
}

pub type Result<T, E = RunError> = std::result::Result<T, E>;
