use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("cannot open {path}: {source}")]
    MissingInput {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    /// Required column absent, or a header that does not match the expected layout.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected} features, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A model document could not be decoded; `path` locates the offending element.
    #[error("model document error at {path}: {message}")]
    ModelFormat { path: String, message: String },

    /// A structural invariant of a model was violated (e.g. a node with zero cover).
    #[error("model integrity error: {0}")]
    Integrity(String),

    #[error("grid point {index}: {source}")]
    GridPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
