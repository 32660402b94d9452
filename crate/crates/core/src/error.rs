use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad input: out-of-range parameters, malformed files, wrong shapes.
    #[error("invalid input: {0}")]
    Validation(String),
    /// The computation ran but produced something unusable.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
