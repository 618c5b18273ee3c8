use thiserror::Error;

/// Errors shared across the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size {0}: need n_g >= 2")]
    InvalidGrid(usize),

    #[error("bundle rank {0} too small: the construction needs N >= 2")]
    RankTooSmall(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("connection form anti-Hermitian defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotAntiHermitian { defect: f64, tol: f64 },

    #[error("path endpoint has an eigenvalue of magnitude {0:.3e} at zero: endpoints must be invertible")]
    EndpointKernel(f64),

    #[error("spectral-flow refinement failed: {0}")]
    Refinement(String),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("malformed field container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
