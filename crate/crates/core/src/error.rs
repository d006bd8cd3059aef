use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("coordinate {coord} is out of range for dimension {dim}")]
    CoordinateOutOfRange { coord: usize, dim: usize },

    #[error("term {index} contains d(x{coord}) but the operation requires it to be absent")]
    ContainsDifferential { index: String, coord: usize },

    #[error("invalid cube: {0}")]
    InvalidCube(String),

    #[error("form is not closed: dw has nonzero term {term}")]
    NotClosed { term: String },

    #[error("form is not weakly closed: residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotWeaklyClosed { residual: f64, tolerance: f64 },

    #[error("degree-0 forms have no primitive")]
    ZeroDegreePrimitive,

    #[error("mollifier radius {radius} too large (must be below {limit})")]
    RadiusTooLarge { radius: f64, limit: f64 },

    #[error("least-squares fit is rank deficient (rank {rank} of {columns})")]
    IllConditioned { rank: usize, columns: usize },

    #[error("residual stagnated at stage {stage}: {residuals:?}")]
    Stagnation { stage: usize, residuals: Vec<f64> },

    #[error("degenerate simplex (volume {volume:e})")]
    DegenerateSimplex { volume: f64 },

    #[error("simplex vertex {vertex:?} lies outside the domain")]
    SimplexOutsideDomain { vertex: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
