use thiserror::Error;

/// Errors raised by the estimator, the plant models and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid permutation {0:?}: expected each index 1..={1} exactly once")]
    InvalidPermutation(Vec<usize>, usize),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure at step {step}: {reason}")]
    NumericalFailure { step: usize, reason: String },

    #[error("divergence at step {step}: {reason}")]
    Divergence { step: usize, reason: String },

    #[error("singular dynamics: denominator {denominator:e} vanishes")]
    SingularDynamics { denominator: f64 },

    #[error("CFL violation: dt = {dt:e} is not below the bound {bound:e} (max |u| = {u_max:e})")]
    Stability { dt: f64, bound: f64, u_max: f64 },

    #[error("rank-deficient information matrix: minimizer is not unique")]
    RankDeficient,

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
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
