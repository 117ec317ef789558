//! Error type shared across the crate.

/// Errors reported by constructors, bound evaluators and verification
/// routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation
    /// (empty input, `N < 2`, a lambda past a certificate boundary, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A population value violates the `[-1, 1]` support assumption.
    #[error("value {value} at index {index} is outside [-1, 1]")]
    ValueOutOfRange { index: usize, value: f64 },

    /// A stated hypothesis of a bound does not hold for the given inputs
    /// (negative weight for the nonnegative-weight bound, nonzero
    /// population mean for the centered comparison bound, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Exhaustive enumeration was requested past the configured budget.
    #[error("enumeration needs at least {required} ordered draws (budget {budget})")]
    BudgetExceeded { required: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
