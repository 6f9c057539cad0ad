use thiserror::Error;

/// Errors produced by the laboratory's numerical components.
#[derive(Debug, Error)]
pub enum SgError {
    /// An argument fell outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector dimensions did not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A configuration value failed validation.
    #[error("configuration error: {0}")]
    Config(String),

    /// Observed non-finite state in a computation that must stay finite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Grid shapes or boxes did not match.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Underlying I/O failure, annotated with the path involved.
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Checkpoint file is malformed or of an unsupported version.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, SgError>;

impl SgError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        SgError::Io { path: path.into(), source }
    }
}
