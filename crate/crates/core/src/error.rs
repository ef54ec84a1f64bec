use thiserror::Error;

/// Errors raised by parameter validation, solvers and samplers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {what} = {index}, limit {limit}")]
    IndexOutOfRange { what: &'static str, index: usize, limit: usize },

    #[error("chain is reducible: {0}")]
    Reducible(String),

    #[error("singular first-passage system: {0}")]
    Singular(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("mismatched support: {left} vs {right} states")]
    SupportMismatch { left: usize, right: usize },

    #[error("not enough samples: need at least {needed}, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },

    #[error("sampler did not terminate after {0} iterations")]
    IterationCap(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
