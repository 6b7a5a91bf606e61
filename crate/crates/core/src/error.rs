use thiserror::Error;

use crate::model::Diagnostic;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid field `{field}`: {message}")]
    Field { field: String, message: String },

    #[error("validation failed: {}", format_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),

    /// Two routes that must agree did not. Signals a tolerance or LP bug,
    /// never a legitimate state of the input.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("velocity field is not an infinitesimal flex (worst violation {violation:e})")]
    NotAFlex { violation: f64 },

    #[error("point lies in the cone (distance {distance:e}); no separating functional")]
    InCone { distance: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

fn format_diagnostics(d: &[Diagnostic]) -> String {
    d.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
