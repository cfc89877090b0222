use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructor rejected parameters that violate a type invariant.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A point expected to lie strictly inside the body does not.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("sampler failure: {0}")]
    Sampler(String),

    /// Monte Carlo output that cannot support the requested estimate.
    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("scan cell (n = {n}, p = {p}): {source}")]
    Cell {
        n: usize,
        p: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error in [{section}]: {message}")]
    Config { section: String, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn config(section: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            section: section.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
