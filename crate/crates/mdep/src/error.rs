use thiserror::Error;

/// Errors produced by construction, evaluation, and estimation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A window or argument list has the wrong length.
    #[error("arity mismatch: got {got}, expected {expected}")]
    Arity { got: usize, expected: usize },

    /// A coordinate is not an atom of the finite-discrete source.
    #[error("value {value} is not an atom of the source")]
    UnknownAtom { value: String },

    /// Invalid construction parameters (probabilities, encodings, shapes).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A value lies outside the domain an operation requires.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exact enumeration would exceed the configured budget.
    #[error(
        "enumeration budget exceeded: {needed} window tuples needed, budget is {budget}; \
         use the Monte Carlo estimator instead"
    )]
    Budget { needed: u128, budget: u64 },

    /// Rejection sampling failed to accept within the configured budget.
    #[error(
        "rejection budget exhausted after {attempts} attempts \
         (observed acceptance rate {rate:.3e})"
    )]
    Rejection { attempts: u64, rate: f64 },

    /// The operation does not support the given configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Failure while parsing an input file.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
