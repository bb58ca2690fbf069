use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unknown column '{0}'")]
    UnknownColumn(String),

    #[error("dataset has a single class")]
    SingleClass,

    #[error("empty protected or unprotected group")]
    EmptyGroup,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("empty feature mask")]
    EmptyMask,

    #[error("empty population")]
    EmptyPopulation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed result file {path}: {reason}")]
    MalformedResult { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
