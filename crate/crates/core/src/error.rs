use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid convex weights: {0}")]
    InvalidWeights(String),
    #[error("empty input")]
    EmptyInput,
    #[error("radius {value} at index {index} is not positive")]
    NonPositiveRadius { index: usize, value: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("nearest point is not unique")]
    NonUniqueProjection,
    #[error("point is farther than the reach ({distance} >= {reach})")]
    OutsideReach { distance: f64, reach: f64 },
    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("restricted ball of point {index} is empty")]
    EmptyRestrictedBall { index: usize },
    #[error("point cloud has no radii")]
    MissingRadii,
    #[error("complex is not face-closed: missing face {0:?}")]
    NotFaceClosed(Vec<usize>),
    #[error("vertex count mismatch: {0} vs {1}")]
    VertexMismatch(usize, usize),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
