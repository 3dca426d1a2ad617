//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by bank construction, transforms, thresholding and I/O.
#[derive(Debug, Error)]
pub enum SmfError {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The mother-wavelet placement equation has no root in the bracket.
    #[error("placement failure: {0}")]
    PlacementFailure(String),

    /// The Littlewood-Paley sum dips below the frame floor.
    #[error("frame-deficient bank: {0}")]
    FrameDeficient(String),

    /// Tensor/signal dimensions do not agree.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An operation was called in the wrong order or on the wrong variant.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Binary or text format violation (magic, version, truncation, ...).
    #[error("format error: {0}")]
    Format(String),

    /// A metric is undefined for the given input (e.g. single-class AUC).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// A problem size exceeds a hard feasibility guard.
    #[error("size guard violated: {0}")]
    SizeGuard(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SmfError>;
