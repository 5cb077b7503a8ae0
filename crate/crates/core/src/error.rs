use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A strategy profile violates a power constraint.
    #[error("constraint violated ({constraint}): {detail}")]
    Constraint {
        constraint: &'static str,
        detail: String,
    },

    /// An iterative solver stopped without meeting its tolerance.
    #[error(
        "{solver} did not converge after {iterations} iterations (residual {residual:e}){context}"
    )]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        context: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
