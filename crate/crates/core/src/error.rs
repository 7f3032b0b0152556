//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported gmsh element type {element_type} (element {element_id}); only 3-node triangles are accepted")]
    UnsupportedElement { element_id: usize, element_type: usize },

    #[error("mesh is not a closed oriented 2-manifold: {0}")]
    NonManifold(String),

    #[error("degenerate mesh: {0}")]
    Degenerate(String),

    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    #[error("incompatible spaces: {0}")]
    SpaceMismatch(String),

    #[error("coefficients unavailable: {0}")]
    ConversionUnavailable(String),

    #[error("matrix is singular to working precision ({0})")]
    Singular(String),

    #[error("matrix is not Hermitian positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("evaluation point {index} lies within {distance:e} of the surface (limit {limit:e})")]
    Proximity {
        index: usize,
        distance: f64,
        limit: f64,
    },

    #[error("blocked operator: {0}")]
    Blocked(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
