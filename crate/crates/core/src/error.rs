use thiserror::Error;

/// Errors raised by the geometry routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u32, u32),

    #[error("tree base must be at least 2, got {0}")]
    InvalidBase(u32),

    #[error("metric base must exceed 1, got {0}")]
    InvalidMetricBase(f64),

    #[error("digit {digit} at height {height} is out of range for base {base}")]
    DigitOutOfRange { base: u32, height: i64, digit: u32 },

    #[error("malformed point encoding: {0}")]
    Parse(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("operation requires a diagonal expanding structure")]
    NotDiagonal,

    #[error("points coincide: {0}")]
    CoincidentPoints(&'static str),

    #[error("height {height} lies above the cap {cap}")]
    AboveCap { height: f64, cap: f64 },

    #[error("structure is not normalized for base {m}: alpha_1 = {alpha1}, expected ln m = {expected}")]
    NotNormalized { m: u32, alpha1: f64, expected: f64 },

    #[error("map is not invertible: {0}")]
    NotInvertible(String),

    #[error("map is not injective on the window: {0}")]
    NotInjective(String),

    #[error("sampler needs at least 2 samples, got {0}")]
    DegenerateSampler(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
