use thiserror::Error;

/// Errors raised by the library. Variants map onto the CLI exit codes:
/// invalid input → 2, resource caps → 3, failed verification → 4.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("elements belong to different fields")]
    MixedContexts,
    #[error("division by zero")]
    DivisionByZero,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
