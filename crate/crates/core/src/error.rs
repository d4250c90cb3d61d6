use thiserror::Error;

/// Errors raised by the spectral laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("spectrum is not Hermitian (asymmetry {asymmetry:e}); cannot produce a real field")]
    NotHermitian { asymmetry: f64 },

    #[error("multiplier is not finite at lattice point {index}")]
    NonFiniteMultiplier { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dyadic index {j} outside representable range [{j_min}, {j_max}]")]
    DyadicOutOfRange { j: i32, j_min: i32, j_max: i32 },

    #[error("time {t} outside the available range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("ratio undefined: denominator vanishes")]
    UndefinedRatio,

    #[error("parameters not admissible: {0}")]
    NotAdmissible(String),

    #[error("run rejected: {0}")]
    Rejected(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(msg()))
    }
}
