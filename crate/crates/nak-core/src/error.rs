use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("no square root: {0}")]
    NoSquareRoot(String),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),
    #[error("too large: {0}")]
    TooLarge(String),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("construction failure: {0}")]
    ConstructionFailure(String),
    #[error("ambiguity failure: {0}")]
    AmbiguityFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
