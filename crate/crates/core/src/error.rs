use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Every variant names the violated precondition or the numerical failure so
/// that front ends can report it verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("argument outside the domain of {func}: {reason}")]
    Domain { func: &'static str, reason: String },

    #[error("poles on the real axis: {0}")]
    RealAxisPoles(String),

    #[error("point {point} lies within {distance:e} of a pole at {pole}")]
    PoleProximity {
        point: String,
        pole: String,
        distance: f64,
    },

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimated error {error:e})")]
    QuadratureNotConverged { subdivisions: usize, error: f64 },

    #[error("truncation bound {bound:e} exceeds tolerance {tolerance:e} ({context})")]
    Truncation {
        bound: f64,
        tolerance: f64,
        context: String,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("extrapolation did not converge: {0}")]
    NonConvergent(String),

    #[error("non-positive eigenvalue {0:e} in a quadratic system")]
    NonPositiveEigenvalue(f64),

    #[error("memory budget exceeded: {0}")]
    Budget(String),

    #[error("roundoff dominates the divided differences at order {order}")]
    RoundoffDominated { order: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
