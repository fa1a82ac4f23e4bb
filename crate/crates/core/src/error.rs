use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero has no prime factorization")]
    Zero,

    /// The instance is larger than the configured resource limit; the caller
    /// has to shrink it.
    #[error("{what} = {value} exceeds the configured limit {limit}")]
    LimitExceeded {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point is not on the surface")]
    NotOnSurface,

    #[error("point lies on line {0}")]
    OnLine(u8),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn limit(what: &'static str, value: impl Into<u128>, limit: impl Into<u128>) -> Self {
        Error::LimitExceeded {
            what,
            value: value.into(),
            limit: limit.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
