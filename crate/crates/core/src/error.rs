use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    Budget {
        what: String,
        needed: u128,
        limit: u128,
    },
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("characteristic 2 is not supported here")]
    EvenCharacteristic,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("pole at z = {0}")]
    Pole(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_budget(what: &str, needed: u128, limit: u128) -> Result<()> {
    if needed > limit {
        Err(Error::Budget {
            what: what.to_string(),
            needed,
            limit,
        })
    } else {
        Ok(())
    }
}
