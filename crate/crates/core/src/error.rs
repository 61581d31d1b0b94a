use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-positive pressure {p:e} (density {rho:e})")]
    NonPositivePressure { rho: f64, p: f64 },

    #[error("non-positive density {0:e}")]
    NonPositiveDensity(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("preconditioner is numerically singular (condition estimate {0:e})")]
    SingularPreconditioner(f64),

    #[error("eigendecomposition of PA failed: {0}")]
    EigendecompositionFailure(String),

    #[error("reconstructed state invalid at face {face}")]
    InvalidReconstructedState { face: usize },

    #[error("state blew up in cell {cell} at step {step}")]
    StateBlowup { cell: usize, step: usize },

    #[error("Newton iteration diverged after {iters} iterations (residual {residual:e})")]
    NewtonDivergence { iters: usize, residual: f64 },

    #[error("linear solve failed after {iters} iterations (relative residual {residual:e})")]
    LinearSolveFailure { iters: usize, residual: f64 },

    #[error("matrix is singular")]
    SingularMatrix,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
