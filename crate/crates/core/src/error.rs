use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("power iteration did not converge after {iterations} iterations (last Rayleigh quotient {rayleigh})")]
    NoConvergence { iterations: usize, rayleigh: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("singular linear system")]
    Singular,
    #[error("broken invariant: {0}")]
    BrokenInvariant(String),
    #[error("oracle failure: {0}")]
    Oracle(String),
}

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}
