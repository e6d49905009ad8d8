use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("sentence {id}: {message}")]
    Invalid { id: String, message: String },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("unknown span category {0:?}")]
    UnknownCategory(String),

    #[error("unknown source id {0:?}")]
    UnknownSource(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("no words in sentence")]
    NoWords,

    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
