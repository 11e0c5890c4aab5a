use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error(
        "quadrature did not converge: value {value}, estimated error {abs_error} after {subdivisions} subdivisions"
    )]
    Quadrature {
        value: f64,
        abs_error: f64,
        subdivisions: usize,
    },

    #[error("estimate too imprecise: relative stderr {relative_stderr} exceeds {limit}")]
    Imprecise { relative_stderr: f64, limit: f64 },

    #[error("too many points for exhaustive search: {m} > {max}")]
    TooManyPoints { m: usize, max: usize },

    #[error("mesh too large: {points} points exceeds cap {cap}")]
    MeshTooLarge { points: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
