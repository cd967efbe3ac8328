use thiserror::Error;

use crate::states::Violation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },

    #[error("{name} = {value} is out of range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("channel annihilated the state (probability {prob:e})")]
    ZeroProbability { prob: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(Violation),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("bound is not monotonically non-increasing near parameter {at}")]
    NotMonotonic { at: f64 },

    #[error("bound never reaches zero on [0, 1] (value {at_one:e} at parameter 1)")]
    NoRoot { at_one: f64 },

    #[error("unknown channel family '{0}'")]
    UnknownFamily(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_finite() && (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: format!("[{lo}, {hi}]"),
        })
    }
}
