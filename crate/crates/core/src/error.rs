use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An intermediate value no longer fits in 64 bits.
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid argument: {0}")]
    Invalid(String),

    /// A period or sieve modulus grew past the configured bit limit.
    #[error("period {period} exceeds the limit {limit}")]
    PeriodLimit { period: u128, limit: u64 },

    /// The expression has no structural (exact) residue computation;
    /// callers are expected to fall back to windowed counting.
    #[error("unsupported structure for exact computation: {0}")]
    Unsupported(String),

    /// A theorem hypothesis failed on the given input.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
