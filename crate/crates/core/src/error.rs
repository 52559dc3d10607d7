//! Crate-wide error type.

/// Errors raised by model construction, sampling, and data loading.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Inputs disagree on dimensions (vector lengths, matrix shapes, index ranges).
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Loaded or constructed data violates a structural invariant.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// An exact enumeration would exceed the configured subset budget.
    #[error("enumeration budget exceeded: {required} subsets > budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    /// File access failed.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
