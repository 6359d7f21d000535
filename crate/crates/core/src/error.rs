use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid stiffness: {0}")]
    InvalidStiffness(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parameter vector outside search space: {0}")]
    OutOfBounds(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("demonstration failed: {0}")]
    DemonstrationFailed(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("missing data: {0}")]
    Missing(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
