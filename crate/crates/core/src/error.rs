use thiserror::Error;

use crate::solver::SolverTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}; only 2 and 3 are supported")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("halfspace normals lie in a closed hemisphere; the intersection is unbounded")]
    UnboundedBody,
    #[error("offset {offset} of halfspace {index} is not positive; the origin is not interior")]
    EmptyInterior { index: usize, offset: f64 },
    #[error("matrix is singular (determinant {0})")]
    SingularMatrix(f64),
    #[error("quadrature dimension {quadrature} does not match body dimension {body}")]
    QuadratureMissing { quadrature: usize, body: usize },
    #[error("measure has no atoms")]
    EmptyMeasure,
    #[error("measure is contained in a closed hemisphere")]
    HemisphereViolation,
    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged {
        residual: f64,
        iterations: usize,
        trace: Box<SolverTrace>,
    },
    #[error("function is trivial: every gradient vanishes")]
    TrivialFunction,
    #[error("mesh overlay failed: {0}")]
    MeshOverlayFailure(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("support function is not positive ({value}) at a quadrature node")]
    NonpositiveSupport { value: f64 },
    #[error("directional energy vanishes on a set of positive measure")]
    DegenerateDirection,
    #[error("profile tail contributes {tail:e} of total {total:e}")]
    DivergentIntegral { tail: f64, total: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category used in structured CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotConverged { .. } => "solver",
            Error::HemisphereViolation
            | Error::UnboundedBody
            | Error::EmptyInterior { .. }
            | Error::SingularMatrix(_)
            | Error::MeshOverlayFailure(_)
            | Error::NonpositiveSupport { .. }
            | Error::DegenerateDirection
            | Error::DivergentIntegral { .. }
            | Error::TrivialFunction => "geometry",
            Error::UnsupportedDimension(_)
            | Error::DimensionMismatch { .. }
            | Error::QuadratureMissing { .. }
            | Error::EmptyMeasure
            | Error::InvalidMesh(_)
            | Error::InvalidParameter(_)
            | Error::Io(_)
            | Error::Json(_) => "input",
        }
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 3 => Ok(()),
        d => Err(Error::UnsupportedDimension(d)),
    }
}
