use thiserror::Error;

/// Errors raised by the washboard toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported frustration `{0}` (built-in cells: 1/2, 1/3, single_junction)")]
    UnsupportedFrustration(String),

    #[error("cell definition, line {line}: {message}")]
    CellFormat { line: usize, message: String },

    #[error("incidence product ωωᵀ is singular (condition number {condition:.3e})")]
    SingularIncidence { condition: f64 },

    #[error("target matrix is not symmetric (max asymmetry {asymmetry:.3e}); the cell is inconsistent")]
    AsymmetricTarget { asymmetry: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("supplied transform fails DᵀD = S/κ (residual {residual:.3e})")]
    CanonicalMismatch { residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("phase-map column {axis} has incommensurate coefficients; no period along this axis")]
    Incommensurate { axis: usize },

    #[error("bad slice specification: {0}")]
    BadSliceSpec(String),

    #[error("Newton iteration did not converge after {iterations} iterations (|∇U|∞ = {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("lost the tracked root branch of the boundary cubic at R = {r}")]
    RootBranchLost { r: f64 },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("numerical blow-up at step {step}")]
    NumericalBlowup { step: usize },

    #[error("covariance matrix is not positive semidefinite")]
    NotPsd,

    #[error("trajectory has too few frames")]
    EmptyTrajectory,

    #[error("trajectory has no recorded velocities")]
    MissingVelocities,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot evaluate expression `{input}`: {message}")]
    Expression { input: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
