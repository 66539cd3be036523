use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("grade {0} is outside the supported range 1..=4")]
    GradeOverflow(usize),

    #[error("invalid index tuple: {0}")]
    InvalidTuple(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("degree {0} is too small for this operation (need d >= 2)")]
    DegreeTooSmall(usize),

    #[error("not an immersion at z = {z}: metric density {density:e}")]
    NotImmersion { z: num_complex::Complex64, density: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("moved curve does not fit the polynomial chart: {0}")]
    ChartFailure(String),

    #[error("missing index: {0}")]
    MissingIndex(String),

    #[error("tail probe failed: {0}")]
    Probe(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
