use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not orthogonal: |RᵀR - I|_F = {residual:e}")]
    NotOrthogonal { residual: f64 },
    #[error("matrix has negative determinant {det}")]
    NegativeDeterminant { det: f64 },
    #[error("matrix is not skew-symmetric: |S + Sᵀ|_F = {residual:e}")]
    NotSkew { residual: f64 },
    #[error("matrix is not an orthogonal projection: {reason}")]
    NotProjection { reason: String },
    #[error("gain k must be positive and finite, got {0}")]
    InvalidGain(f64),
    #[error("vector is not unit length: |v| = {norm}")]
    NotUnit { norm: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("eigenvalue iteration did not converge within {iterations} sweeps")]
    NoConvergence { iterations: usize },
    #[error("integration step rejected at t = {t}: non-finite state")]
    StepRejected { t: f64 },
    #[error("cosh(Pt) + sinh(Pt)H0 is singular at t = {t}")]
    SingularY { t: f64 },
    #[error("initial condition outside the domain of the exact solution: {0}")]
    DomainError(String),
    #[error("exact solution has imaginary residue {residue:e}")]
    RealityError { residue: f64 },
    #[error("reconstruction system is singular")]
    SingularSystem,
    #[error("not an equilibrium (stationarity residual {residual:e})")]
    NotAnEquilibrium { residual: f64 },
    #[error("inconsistent equilibrium parameters: {0}")]
    InconsistentParameters(String),
    #[error("projection rank {found} not supported here (expected {expected})")]
    RankMismatch { expected: usize, found: usize },
    #[error("invalid simulation parameters: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
