use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("I/O error: {0}")]
    Stream(#[from] io::Error),

    /// A file exists but does not follow the expected layout.
    #[error("format error: {0}")]
    Format(String),

    /// A file ended before the declared amount of data was read.
    #[error("truncated file: {0}")]
    Truncated(String),

    /// The input data violates a precondition (empty bin, unknown word, ...).
    #[error("{0}")]
    Data(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    /// A computation produced an undefined or non-finite quantity.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
