use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Parameters outside the admissible range (N >= 3, 0 <= s < 2, gamma < (N-2)^2/4).
    #[error("invalid parameters: {0}")]
    Domain(String),

    /// A caller-supplied argument was rejected (grid shape, radius, cone id, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("eigenvalue iteration did not converge (residual {residual:e})")]
    EigenNonConvergence { residual: f64 },

    /// Two grid levels disagree by more than the requested tolerance.
    #[error("grid resolution insufficient: two-grid disagreement {disagreement:e} > {tolerance:e}")]
    GridResolution { disagreement: f64, tolerance: f64 },

    #[error("no root in the requested range")]
    NoRoot,

    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("continuation step size collapsed at gamma = {gamma}")]
    StepCollapse { gamma: f64 },

    #[error("solution left cone {cone} at gamma = {gamma} (min signed derivative {min_derivative:e})")]
    ConeExit {
        cone: String,
        gamma: f64,
        min_derivative: f64,
    },

    /// Minimisation stopped making progress before reaching the tolerance.
    #[error("minimisation stalled after {iterations} iterations (gradient norm {gradient_norm:e})")]
    Stall {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
