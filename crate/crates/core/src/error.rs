use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument is outside its admissible range.
    InvalidParameter { name: &'static str, reason: String },
    DimensionMismatch { expected: usize, found: usize },
    /// A state that must be unit-norm is not.
    NotNormalized { norm: f64 },
    NotOrthonormal { deviation: f64 },
    /// Jacobi or QL iteration ran out of sweeps.
    NoConvergence { iterations: usize, residual: f64 },
    /// Propagation lost unitarity beyond the abort threshold.
    NormDrift { step: usize, norm: f64 },
    /// The caller's `h_max` is smaller than a sampled `‖H(t)‖`.
    NormBoundExceeded { s: f64, norm: f64, bound: f64 },
    /// A perturbation exceeds its declared norm cap.
    PerturbationTooLarge { norm: f64, g_max: f64 },
    Unsupported(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => write!(f, "invalid `{name}`: {reason}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotNormalized { norm } => write!(f, "state is not normalized (norm {norm:e})"),
            Error::NotOrthonormal { deviation } => {
                write!(f, "vectors are not orthonormal (max deviation {deviation:e})")
            }
            Error::NoConvergence { iterations, residual } => write!(
                f,
                "eigensolver did not converge after {iterations} iterations (residual {residual:e})"
            ),
            Error::NormDrift { step, norm } => {
                write!(f, "norm drifted to {norm} at step {step}; aborting propagation")
            }
            Error::NormBoundExceeded { s, norm, bound } => {
                write!(f, "‖H(s={s})‖ = {norm} exceeds the declared bound {bound}")
            }
            Error::PerturbationTooLarge { norm, g_max } => {
                write!(f, "perturbation norm {norm} exceeds g_max = {g_max}")
            }
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
        }
    }
}

impl core::error::Error for Error {}
