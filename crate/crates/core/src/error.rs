use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("integration failure: {0}")]
    Integration(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by the numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature(_) | Error::NonConvergence(_) | Error::Integration(_)
        )
    }
}
