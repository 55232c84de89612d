use thiserror::Error;

/// Failures shared by every module. The CLI maps the variants to exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("conjugate unknown: {0}")]
    ConjugateUnknown(String),
    #[error("malformed newform file: {0}")]
    Format(String),
    #[error("unknown cusp class: {0}")]
    UnknownCusp(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn pre<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
