use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum StokesError {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("boundary is traversed clockwise; counterclockwise orientation is required")]
    Orientation,

    #[error("singular evaluation: point {z} coincides with a pole")]
    SingularEvaluation { z: Complex64 },

    #[error("orthogonalization broke down in block {block} at column {column} (h = {value:e})")]
    Breakdown {
        block: usize,
        column: usize,
        value: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate basis: column {0} has zero norm")]
    DegenerateColumn(usize),

    #[error("least-squares data contains non-finite entries")]
    NonFinite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, StokesError>;
