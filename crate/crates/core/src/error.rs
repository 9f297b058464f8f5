//! Error types shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A requested series tolerance could not be met at the configured
    /// truncation; carries the achieved absolute tail bound.
    #[error("truncation failure: {context} (achieved tail bound {tail:.3e}, requested {requested:.3e})")]
    TruncationFailure {
        context: String,
        tail: f64,
        requested: f64,
    },

    /// Adaptive quadrature did not converge; carries the residual estimate.
    #[error("quadrature failure: {context} (residual estimate {residual:.3e})")]
    QuadratureFailure { context: String, residual: f64 },

    #[error("drift evaluation outside table range at (t={t}, x={x:?})")]
    DriftExtrapolation { t: f64, x: Vec<f64> },

    /// No contraction window in the halving schedule satisfied the target;
    /// the drift is too singular for the implemented quadrature.
    #[error("non-contractive drift: smallest schedule window {delta:.3e} still has C estimate {c_est:.3e} >= target {target:.3e}")]
    NonContractiveDrift { delta: f64, c_est: f64, target: f64 },

    #[error("insufficient sample: {0}")]
    InsufficientSample(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("drift expression parse error: {0}")]
    DriftParse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
