//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatError {
    #[error("cutoff {cutoff} too small: truncation leakage {leakage:.3e} exceeds {tol:.3e}")]
    CutoffTooSmall {
        cutoff: usize,
        leakage: f64,
        tol: f64,
    },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error(
        "Kraus series left residual weight {residual:.3e} after {terms} terms (cutoff too small)"
    )]
    NonConvergentKrausTail { residual: f64, terms: usize },
    #[error(
        "outcome enumeration cap {cap} reached at cumulative probability {cumulative} \
         (cutoff or cap too small)"
    )]
    EnumerationCapReached { cap: usize, cumulative: f64 },
    #[error("post-selection retained zero probability")]
    ZeroRetainedProbability,
    #[error("reflection coefficient modulus {modulus} differs from 1 by more than {tol}")]
    NonIdealReflection { modulus: f64, tol: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, CatError>;
