use thiserror::Error;

/// Errors raised by the laboratory operations.
#[derive(Debug, Error)]
pub enum OilError {
    #[error("duplicate Fourier degree {0} in symbol")]
    DuplicateDegree(i64),

    #[error("guard band violated: depth {depth} with bandwidth {bandwidth} needs a window of at least {required} modes, got {actual}")]
    GuardViolation {
        depth: usize,
        bandwidth: usize,
        required: usize,
        actual: usize,
    },

    #[error("window [{lo}, {hi}] has no negative modes")]
    HardyOnlyWindow { lo: i64, hi: i64 },

    #[error("window [{lo}, {hi}] is not contained in the Hardy space")]
    NotHardyWindow { lo: i64, hi: i64 },

    #[error("window mismatch: {0}")]
    WindowMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value at index {0} is zero, log-log fit undefined")]
    ZeroInFitRange(usize),

    #[error("partial sum S_{0} vanishes")]
    VanishingPartialSum(usize),

    #[error("map is not a contraction: largest eigenvalue of sum K K* is {0}")]
    NotContraction(f64),

    #[error("orthonormal completion failed: residual norm {0} below tolerance")]
    CompletionFailed(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, OilError>;
