use thiserror::Error;

/// Errors raised anywhere in the meshing / assembly / solve pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("half-opening angle {0} must lie strictly inside (0, pi/2)")]
    InvalidAngle(f64),

    #[error("domain length must be at least one period, got {0}")]
    InvalidLength(usize),

    #[error("mesh level must be at least 1, got {0}")]
    InvalidLevel(usize),

    #[error("unsupported polynomial degree {0} (supported: 1..=6)")]
    UnsupportedDegree(usize),

    #[error("unsupported quadrature degree {0} (supported: 0..=60)")]
    UnsupportedQuadrature(usize),

    #[error("degenerate triangle {element}: jacobian determinant {det:e}")]
    DegenerateElement { element: usize, det: f64 },

    #[error("matrix is not positive definite (non-positive pivot during factorization)")]
    NotPositiveDefinite,

    #[error("eigensolver did not converge after {iterations} iterations (best residuals {residuals:?})")]
    NoConvergence { iterations: usize, residuals: Vec<f64> },

    #[error("point ({0}, {1}) lies outside every element")]
    OutsideDomain(f64, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("refinement check failed: {0}")]
    Unresolved(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: Box<Error> },
}

impl Error {
    /// Attaches the pipeline stage that produced the error.
    pub fn at(self, stage: &'static str) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage { stage, source: Box::new(e) },
        }
    }

    /// The innermost error, with any stage tags removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

/// Tags the error of a fallible stage.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
