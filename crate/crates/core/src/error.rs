use std::path::PathBuf;

use thiserror::Error;

use crate::maps::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}", join_violations(.0))]
    Config(Vec<Violation>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: line {line}, column {column}: {message}")]
    Parse {
        context: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("manifest {context}: {message}")]
    Manifest { context: String, message: String },

    #[error("png encoding failed for {path}: {message}")]
    Png { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// The violated constraints, when this is a configuration error.
    pub fn violations(&self) -> &[Violation] {
        match self {
            Error::Config(v) => v,
            _ => &[],
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("invalid configuration: {}", parts.join("; "))
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
