use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sequence is not {ratio}-lacunary at index {index}: {next} < {ratio} * {prev}")]
    NotLacunary {
        index: usize,
        prev: i64,
        next: i64,
        ratio: f64,
    },

    #[error("index out of range: window ({start}, {end}] exceeds available length {len}")]
    IndexOutOfRange { start: usize, end: usize, len: usize },

    #[error("frequency arithmetic overflowed i64")]
    Overflow,

    #[error("grid too coarse: {points} points, at least {required} required")]
    GridTooCoarse { points: usize, required: usize },

    #[error("C_p diverges or is excluded for p = {0}; p > 2 is required")]
    DivergentIntegral(f64),

    #[error("quadrature did not converge: estimate {estimate}, error bound {error}")]
    QuadratureFailed { estimate: f64, error: f64 },

    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
