use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("field does not belong to this discrete space: {0}")]
    SpaceMismatch(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid truncation: {0}")]
    Truncation(String),

    #[error("compatibility condition violated: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Compatibility { residual: f64, tolerance: f64 },

    #[error("coefficient bound violated: {0}")]
    Coefficient(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("initial data rejected: {0}")]
    Membership(String),

    #[error("trajectory error: {0}")]
    Trajectory(String),

    #[error("problem too large for the dense reference: {0}")]
    SizeGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
