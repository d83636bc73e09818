use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error in {operation}: {detail}")]
    Domain { operation: &'static str, detail: String },

    /// A family or parameter set violates one of its defining relations.
    #[error("constraint violated: {relation} (residual {residual:e})")]
    Constraint { relation: String, residual: f64 },

    #[error("{operation} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        operation: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("Gauss-Laguerre node search failed for order {order}")]
    QuadratureNodes { order: usize },

    #[error("pole at t = {t}: {detail}")]
    Pole { t: f64, detail: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state needs the coefficient c(t): {0}")]
    MissingCoefficient(String),

    #[error("Chiellini condition fails: q varies by {deviation:e} over the grid")]
    NotIntegrable { deviation: f64 },

    #[error("step size underflow at t = {t} (step {step:e})")]
    StepUnderflow { t: f64, step: f64 },

    /// Negative second moment in the noncommutative products.
    #[error("unphysical parameters: <{quantity}> = {value:e} is negative")]
    NegativeRadicand { quantity: &'static str, value: f64 },
}

pub(crate) fn domain(operation: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        operation,
        detail: detail.into(),
    }
}
