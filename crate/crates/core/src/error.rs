use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pole of {function} at {at}")]
    Pole { function: &'static str, at: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parity requirement violated: {0}")]
    Parity(String),

    #[error("point ({s1}, {s2}) lies outside the convergence region of the double series")]
    Region { s1: String, s2: String },

    #[error("point lies on singular set(s): {}", .0.join(", "))]
    Singular(Vec<String>),

    #[error("contour abscissa N = {n} too small at this point; need N >= {required}")]
    ContourTooLow { n: u32, required: u32 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("zero table is not strictly ascending at line {line}")]
    Ordering { line: usize },

    #[error("zero validation failed at indices {0:?}")]
    Validation(Vec<usize>),

    #[error("zero table missing: {0}")]
    ZerosMissing(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
