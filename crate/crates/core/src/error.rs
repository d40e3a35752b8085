use thiserror::Error;

/// Errors produced anywhere in the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("convex conjugate unavailable for Cressie-Read index {0}")]
    ConjugateUnavailable(f64),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular matrix (pivot {pivot} at index {index})")]
    Singular { index: usize, pivot: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("no feasible starting point after {rejected} rejected draws")]
    NoFeasibleStart { rejected: usize },

    #[error("infeasible parameter point: {0}")]
    Infeasible(String),

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
