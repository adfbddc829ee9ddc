use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The backend could not produce a reply (transport failure after
    /// retries, exhausted mock script, bad HTTP status).
    #[error("backend error: {0}")]
    Backend(String),

    /// The backend replied, but not within the step's contract, even after
    /// one re-ask.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Core(#[from] afford3d_core::Error),
}

impl Error {
    /// True for failures that should mark a task failed rather than abort a
    /// whole batch.
    pub fn is_task_level(&self) -> bool {
        matches!(self, Error::Backend(_) | Error::Protocol(_))
    }
}
