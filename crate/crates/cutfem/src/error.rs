use thiserror::Error;

/// Crate-wide error type.
///
/// Geometry and assembly guards are conditions that should be unreachable for
/// admissible inputs; they exist so a bad configuration fails loudly instead
/// of producing silent garbage.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),

    #[error("extended-domain nesting violated (coarse element {coarse}, fine element {fine}): {detail}")]
    NestingViolation {
        coarse: usize,
        fine: usize,
        detail: String,
    },

    #[error("degenerate cut on element {element}: {detail}")]
    DegenerateCut { element: usize, detail: String },

    #[error("matrix not positive definite: {0}")]
    NotSpd(String),

    #[error("zero diagonal entry at row {0} in Gauss-Seidel sweep")]
    ZeroDiagonal(usize),

    #[error("solver diverged after {iterations} iterations (residual {residual:.3e})")]
    Diverged { iterations: usize, residual: f64 },

    #[error("solver did not converge within {max_iter} iterations (residual {residual:.3e})")]
    NotConverged { max_iter: usize, residual: f64 },

    #[error("point {point:?} not found in mesh")]
    PointNotInMesh { point: [f64; 3] },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
