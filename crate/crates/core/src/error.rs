use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("exponent q must be at least 1")]
    ZeroExponent,

    #[error("expected a nonnegative integer, got {0}")]
    Negative(String),

    #[error("lower index {lower} exceeds upper index {upper}")]
    LowerExceedsUpper { upper: String, lower: String },

    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: String, modulus: String },

    /// The requested input lies outside the hypothesis of the underlying theorem.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// A configured resource guard (sieve size, exact-arithmetic size, ...) would be exceeded.
    #[error("{what} = {value} exceeds the configured limit {limit}")]
    Guard {
        what: &'static str,
        value: String,
        limit: String,
    },

    #[error("comparison still indeterminate at {0} bits of precision")]
    Indeterminate(u32),

    #[error("no crossover found below 2^{0}")]
    NoCrossover(u64),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Resource-guard failures are reported separately from domain errors by the CLI.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Guard { .. } | Error::Indeterminate(_))
    }

    pub(crate) fn guard(what: &'static str, value: impl ToString, limit: impl ToString) -> Self {
        Error::Guard {
            what,
            value: value.to_string(),
            limit: limit.to_string(),
        }
    }
}
