use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {x} lies outside the parametric interval [0, 1]")]
    OutOfDomain { x: f64 },

    #[error("quasi-interpolants are only available for degrees 2 and 3 (got {0})")]
    UnsupportedDegree(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("zero pivot {pivot} in LDL^T factorization")]
    SingularPivot { pivot: usize },

    #[error("linear solve failed: relative residual {residual:e} above {tolerance:e}")]
    SolveResidual { residual: f64, tolerance: f64 },

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("eigensolver did not converge in {iterations} iterations (max residual {residual:e})")]
    EigenNotConverged { iterations: usize, residual: f64 },

    #[error("geometry map is singular at ({0}, {1})")]
    SingularMap(f64, f64),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
