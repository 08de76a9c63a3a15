use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("probability parameter p = {0} outside [0, 1]")]
    Domain(f64),

    #[error("payoff order violated at node (k={k}, z={z}): f = {f}, g = {g}")]
    OrderViolation { k: usize, z: i64, f: f64, g: f64 },

    #[error("non-finite payoff value at node (k={k}, z={z})")]
    NumericOverflow { k: usize, z: i64 },

    #[error("full value grid not retained; re-solve with Retention::Full")]
    MissingGrid,

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
}
