use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("n_pairs = {requested} outside 1..={available}")]
    PairCount { requested: usize, available: usize },

    #[error("every-second-site counting needs n_sites divisible by 4, got {0}")]
    NotDivisibleByFour(usize),

    #[error("polynomial route lost precision: p({m}) = {value:e}")]
    Cancellation { m: usize, value: f64 },

    #[error("system too large for the oracle: {size} > {limit}")]
    OracleTooLarge { size: usize, limit: usize },

    #[error("mask length {got} does not match {expected} modes")]
    MaskLength { got: usize, expected: usize },

    #[error("eigensolver failed: {0}")]
    Eigen(String),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        reason: reason.into(),
    }
}
