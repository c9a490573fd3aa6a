use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;
use crate::domain::DomainError;
use crate::expr::EvalError;
use crate::geometry::GeometryError;
use crate::solution::SolveError;

/// Crate-level error; each variant maps to a CLI exit status.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("`{label}`: {source}")]
    Expression { label: String, source: EvalError },
    #[error("sampling `{label}`: {source}")]
    Sampling { label: String, source: DomainError },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("results in {path}: {message}")]
    Results { path: PathBuf, message: String },
    #[error("instance has {nodes} quadrature nodes, the oracle accepts at most {limit}")]
    TooLarge { nodes: u128, limit: u128 },
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Expression { .. } | Error::Io { .. } | Error::Results { .. } => 1,
            Error::Domain(DomainError::DegenerateInterval { .. }) => 1,
            Error::Solve(SolveError::NotConverged { .. }) => 3,
            Error::Geometry(_) | Error::Domain(_) | Error::Sampling { .. } | Error::Solve(_) => 2,
            Error::TooLarge { .. } => 5,
        }
    }
}
