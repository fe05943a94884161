use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("basis index {index} out of range (basis has {count} functions)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("moment of power {power} diverges: support [{lo}, {hi}] contains the origin")]
    DivergentMoment { power: i32, lo: f64, hi: f64 },

    #[error("evaluation at x = {x} hits a point mass (pole)")]
    Pole { x: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("asymptotic expansion unavailable: {0}")]
    UnavailableExpansion(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("solver did not reach optimality: {0}")]
    Solver(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
