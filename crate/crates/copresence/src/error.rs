use std::path::PathBuf;
use thiserror::Error;

/// Crate-wide error type. The CLI maps variants onto process exit codes:
/// contract violations → 2, missing upstream artifacts → 3, internal
/// invariant failures → 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("input contract violation: {0}")]
    Contract(String),
    #[error("missing upstream artifact: {0}")]
    MissingArtifact(String),
    #[error("internal invariant failure: {0}")]
    Invariant(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn missing_artifact(msg: impl Into<String>) -> Self {
        Error::MissingArtifact(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Contract(_) => 2,
            Error::MissingArtifact(_) => 3,
            Error::Invariant(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
