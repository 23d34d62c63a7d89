use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("no observations")]
    EmptySample,

    #[error("observation {index} = {value} lies outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },

    #[error("observation {index} = {value} is on the boundary; maximum likelihood needs values strictly inside (0, 1)")]
    NonInteriorData { index: usize, value: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("probability integral transform hit {0}; Anderson-Darling needs values strictly inside (0, 1)")]
    DegenerateTransform(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("order statistic index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("bootstrap replicate {replicate} failed after {attempts} attempts: {last}")]
    ReplicateFailed {
        replicate: usize,
        attempts: usize,
        last: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        function,
        detail: detail.into(),
    }
}
