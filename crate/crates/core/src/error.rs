use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The gradient of the optimism map is only defined away from the
    /// simplex boundary; callers clamp before asking for it.
    #[error("policy entry {index} = {value:e} outside interior [{floor:e}, 1 - floor]; clamp before differentiating")]
    NotInterior { index: usize, value: f64, floor: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("iteration limit reached: {0}")]
    IterationLimit(String),

    #[error("instance generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
