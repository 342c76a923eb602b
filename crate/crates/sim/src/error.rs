use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] ofdm_im::Error),

    #[error("invalid run specification: {0}")]
    Spec(String),

    #[error("cannot parse config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),

    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io { path: path.into(), source }
    }

    /// Process exit code: 1 for bad input, 2 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Io { .. } | SimError::Serialize(_) | SimError::Pool(_) => 2,
            SimError::Core(_) | SimError::Spec(_) | SimError::Config { .. } => 1,
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
