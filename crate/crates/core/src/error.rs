use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Riesz potential of order {order} is undefined on a field with nonzero mean {mean:e}")]
    NonzeroMean { order: f64, mean: f64 },

    #[error("divergent tail integral: {0}")]
    DivergentTail(String),

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:e}")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("modulus has infinite slope at the origin; gradient bound is vacuous")]
    VacuousGradientBound,

    #[error("block index {j} outside the available range {min}..={max}")]
    BlockOutOfRange { j: i32, min: i32, max: i32 },

    #[error("state became non-finite at t = {time}")]
    Diverged { time: f64 },

    #[error("bad snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
