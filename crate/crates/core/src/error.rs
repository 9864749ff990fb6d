use thiserror::Error;

/// Errors raised by the kernels and the geometric constructions built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("invalid k = {k} for a system of size {n}")]
    InvalidK { k: usize, n: usize },

    #[error("invariant violated: {name}: {detail}")]
    InvariantViolation { name: String, detail: String },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn violation(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::InvariantViolation {
            name: name.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
