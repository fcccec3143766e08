use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("payload size mismatch for field '{field}': expected {expected} bytes, found {found}")]
    PayloadSize {
        field: String,
        expected: usize,
        found: usize,
    },

    #[error("duplicate field name '{0}'")]
    DuplicateField(String),

    #[error("non-finite value in field '{field}' at voxel {index}")]
    NonFinite { field: String, index: usize },

    #[error("unknown field '{0}'")]
    MissingField(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid trait: {0}")]
    InvalidTrait(String),

    #[error("invalid derived quantity: {0}")]
    InvalidDerived(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSynthetic(String),

    #[error("invalid format: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
