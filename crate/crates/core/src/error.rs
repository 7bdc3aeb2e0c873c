use thiserror::Error;

/// Errors produced by the estimation and classification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Requested basis frequencies reach the Nyquist limit of the sample grid.
    #[error(
        "frequency overflow: {coefficients} coefficients need more than {} samples, got {samples}",
        2 * coefficients
    )]
    FrequencyOverflow { coefficients: usize, samples: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Rejection sampling could not place prototypes far enough apart.
    #[error(
        "class model construction failed: separation constraint requires pairwise distance > {required:.6}, best achieved minimum pairwise distance {achieved:.6} after {attempts} attempts"
    )]
    Construction {
        required: f64,
        achieved: f64,
        attempts: usize,
    },

    #[error("singular covariance matrix: use a nonzero ridge or reduce dimension with PCA")]
    SingularCovariance,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("empty grid: {0}")]
    EmptyGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
