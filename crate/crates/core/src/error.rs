use thiserror::Error;

/// Errors produced by the procedures, samplers and estimators in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("density fit failed after {iterations} iterations: {reason}")]
    Fit { reason: String, iterations: usize },

    #[error("sampler produced a non-finite {what} at sweep {sweep}")]
    Sampler { sweep: usize, what: &'static str },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Nominal levels must lie strictly between 0 and 1.
pub fn check_gamma<T: crate::Real>(gamma: T) -> Result<()> {
    if gamma > T::zero() && gamma < T::one() {
        Ok(())
    } else {
        Err(Error::Config(format!("nominal level must lie in (0, 1), got {gamma}")))
    }
}
