//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An integrand or intermediate quantity evaluated to NaN/infinity.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// The symmetric eigensolver did not converge within its iteration budget.
    #[error("eigensolver failed to converge on a {size}x{size} matrix")]
    EigenFailure { size: usize },

    /// A fixed-point scan found no usable bracket.
    #[error("fixed-point scan found no sign change on a {grid}-point grid; retry with a denser grid")]
    BracketFailure { grid: usize },

    /// An iterative optimizer ran out of budget before reaching its tolerance.
    #[error("optimizer budget exhausted: {0}")]
    OptimizerBudget(String),

    /// Exact-density enumeration is capped to keep 2^n mixture terms tractable.
    #[error("user count n = {n} exceeds the exact-enumeration cap of {max}")]
    TooManyUsers { n: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
