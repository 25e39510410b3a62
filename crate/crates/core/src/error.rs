use thiserror::Error;

use crate::state::Representation;

/// Errors raised by the phase-space library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KvnError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("expected a state in the {expected:?} representation, found {found:?}")]
    WrongRepresentation {
        expected: Representation,
        found: Representation,
    },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("{0} lies outside the grid")]
    OutsideGrid(String),

    #[error("unresolved on this grid: {0}")]
    Unresolved(String),

    #[error("transported support crosses the periodic seam: {0}")]
    WrapAround(String),

    #[error("propagation kernel is singular at t = 0; use the spectral backend")]
    SingularTime,

    #[error("image-sum tail estimate {estimate:.3e} exceeds tolerance {tol:.3e}; raise n_images")]
    ImageTruncation { estimate: f64, tol: f64 },

    #[error("time step violates the phase-resolution limit: {0}")]
    Nyquist(String),

    #[error("grid is not aligned to the walls: {0}")]
    NotWallAligned(String),

    #[error("finite-difference probe too coarse: residual {residual:.3e} is step-limited")]
    ProbeTooCoarse { residual: f64 },

    #[error("density has no mass")]
    EmptyDensity,

    #[error("experiment failed: {0}")]
    Experiment(String),
}

pub type Result<T> = std::result::Result<T, KvnError>;
