use alloc::string::String;

/// Errors raised by assembly, the matrix-function engine, and time stepping.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate element {element}: signed volume {volume:e}")]
    DegenerateElement { element: usize, volume: f64 },

    #[error("nonpositive mass entry {value:e} at node {node}")]
    NonPositiveMass { node: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("elliptic modulus {0} outside [0, 1)")]
    EllipticDomain(f64),

    #[error(
        "deflated operator is numerically singular (lambda_min = {lambda_min:e}, \
         lambda_max = {lambda_max:e}); increase the deflation count"
    )]
    SingularDeflatedOperator { lambda_min: f64, lambda_max: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:e})")]
    EigenNoConvergence { iterations: usize, residual: f64 },

    #[error("shifted Lanczos did not converge after {iterations} iterations (worst relative residual {residual:e})")]
    LanczosNoConvergence { iterations: usize, residual: f64 },

    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:e})")]
    LinearSolveNoConvergence { iterations: usize, residual: f64 },

    #[error("spectral function is not finite at pole {index}")]
    NonFiniteFunction { index: usize },

    #[error("Picard iteration did not converge after {iterations} iterations (last update {update:e})")]
    PicardNoConvergence { iterations: usize, update: f64 },

    #[error("solution diverged at node {node} (value {value})")]
    Divergence { node: usize, value: f64 },

    #[error("calcium concentration must be positive, got {0}")]
    CalciumDomain(f64),

    #[error("region label {label} at node {node}; only regions 1 and 2 are supported")]
    TooManyRegions { node: usize, label: u8 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
