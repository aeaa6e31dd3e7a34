use thiserror::Error;

/// Failures raised by the solvers and kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NonHermitianInput { asymmetry: f64, tolerance: f64 },

    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("singular pencil: {0}")]
    SingularPencil(String),

    #[error("level set at {alpha} is empty")]
    EmptyLevelSet { alpha: f64 },

    #[error("curvature bound must be negative, got {0}")]
    InvalidGamma(f64),

    /// Two support functions coincide; the payload is the interval midpoint and the common value there.
    #[error("support functions coincide on the interval")]
    DegenerateSupports { omega: f64, value: f64 },

    #[error("reduced problem failed: {0}")]
    ReducedSolveFailure(String),

    #[error("verification failed: {0}")]
    VerificationFailure(String),

    #[error("mass matrix is not positive definite")]
    NotPositiveDefiniteMass,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
