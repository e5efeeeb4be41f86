use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate platform: {0}")]
    DegenerateTriangle(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("platform vertex B{0} coincides with its base anchor A{0}")]
    CoincidentAnchor(usize),

    #[error("degenerate slice point: rod {0} has zero length")]
    DegenerateSlice(usize),

    #[error("adjoint has no row or column above tolerance (rank <= 1 singularity)")]
    RankDeficientAdjoint,

    #[error("polynomial degree {degree} exceeds the cap of {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
