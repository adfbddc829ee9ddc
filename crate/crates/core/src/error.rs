//! Error type shared by the core modules.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A file did not match its expected format (bad PLY header, bad JSON shape, ...).
    #[error("format error: {0}")]
    Format(String),

    /// The file parsed but carried invalid data (non-finite coordinate, ...).
    #[error("data error: {0}")]
    Data(String),

    /// An argument violated a precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An operation that needs at least one item got none.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A point index referenced something outside the cloud.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A string was not a member of a closed vocabulary.
    #[error("unknown vocabulary value: {0}")]
    Vocabulary(String),

    /// A numeric field fell outside its allowed range.
    #[error("value out of range: {0}")]
    Range(String),

    /// Task ids in paired inputs did not line up.
    #[error("input mismatch: {0}")]
    InputMismatch(String),

    #[error("I/O error{}: {source}", path.as_ref().map(|p| format!(" ({p})")).unwrap_or_default())]
    Io {
        #[source]
        source: std::io::Error,
        path: Option<String>,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn io(source: std::io::Error, path: impl Into<String>) -> Self {
        Error::Io {
            source,
            path: Some(path.into()),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(source: std::io::Error) -> Self {
        Error::Io { source, path: None }
    }
}
