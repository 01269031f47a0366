use thiserror::Error;

use crate::set1d::RealSet1D;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {0:?} lies outside the domain")]
    OutsideDomain(Vec<f64>),

    #[error("function is not locally Lipschitzian here; singular subdifferential is {singular}")]
    NotLipschitz { singular: RealSet1D },

    #[error("difference quotients blow up near the point")]
    BlowUp,

    #[error("unsupported structure: {0}")]
    Unsupported(String),

    #[error("lattice has {points} points, above the cap of {cap}")]
    GridCapExceeded { points: u128, cap: u64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
