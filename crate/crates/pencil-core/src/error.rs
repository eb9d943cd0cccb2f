use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, Error)]
pub enum PencilError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix {0} is not symmetric within tolerance")]
    NotSymmetric(String),
    #[error("matrix {0} is not positive definite")]
    NotPositiveDefinite(String),
    #[error("tuple is not monic (A22 != I)")]
    NotMonic,
    #[error("operator is not elliptic: {0}")]
    NotElliptic(String),
    #[error("eigenvector basis is ill conditioned (cond = {0:.3e})")]
    IllConditionedEigenbasis(f64),
    #[error("factorization residual {0:.3e} exceeds tolerance")]
    ResidualTooLarge(f64),
    #[error("matrix is singular (0 in spectrum)")]
    SingularMatrix,
    #[error("eigenvalue within {0:.3e} of the active branch cut")]
    BranchCut(f64),
    #[error("eigensolver failed to converge")]
    NonConvergence,
    #[error("lambda = 0 is handled separately (no power representation)")]
    ZeroLambda,
    #[error("tuple is not Neumann well-posed")]
    NotNeumannWellPosed,
    #[error("numerical-range check failed: {0}")]
    RangeViolation(String),
    #[error("determinant vanishes on the region boundary")]
    BoundaryZero,
    #[error("phase tracking exhausted refinement along the contour")]
    PhaseJump,
    #[error("region subdivision exceeded max depth")]
    MaxDepthExceeded,
    #[error("branch seed is invalid: {0}")]
    SeedInvalid(String),
    #[error("integration step underflow at phi = {0}")]
    StepUnderflow(f64),
    #[error("oracle/algebraic root mismatch: {0}")]
    Mismatch(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("ellipticity implication chain violated: {0}")]
    ImplicationViolation(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, PencilError>;
