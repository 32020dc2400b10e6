use thiserror::Error;

/// Errors shared by every module in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("support mismatch: student probability is zero where teacher is positive (row {row}, col {col})")]
    SupportMismatch { row: usize, col: usize },

    #[error("degenerate gradient: zero matrix cannot be orthogonalized")]
    DegenerateGradient,

    #[error("undefined angle: zero-norm gradient")]
    UndefinedAngle,

    #[error("degenerate latent: zero latent cannot be projected against")]
    DegenerateLatent,

    #[error("cannot orient zero gradient toward a nonzero target norm")]
    ZeroGradientOrientation,

    #[error("attention rows are not stochastic: row {row} sums to {sum}")]
    NonStochasticRows { row: usize, sum: f64 },

    #[error("non-PSD covariance: eigenvalue {eigenvalue} below tolerance")]
    NonPsdCovariance { eigenvalue: f64 },

    #[error("texture too small for angle set: crop {crop} is below the SSIM window {window}")]
    TextureTooSmall { crop: usize, window: usize },

    #[error("malformed input at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },

    #[error("zero norm: {0}")]
    ZeroNorm(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
