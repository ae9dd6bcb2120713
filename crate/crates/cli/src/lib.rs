//! Configuration and command implementations behind the `hsbif` binary.

pub mod commands;
pub mod config;

use hsbif::Error;

/// Process exit code for an error: 2 for rejected input, 1 for numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::InvalidArgument(_) | Error::Parse(_) => 2,
        _ => 1,
    }
}

/// Machine-readable kind of an error.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::Overflow(_) => "overflow",
        Error::Quadrature { .. } => "quadrature",
        Error::EigenNonConvergence { .. } => "eigen_non_convergence",
        Error::GridResolution { .. } => "grid_resolution",
        Error::NoRoot => "no_root",
        Error::MaxIterations { .. } => "max_iterations",
        Error::LinearSolve(_) => "linear_solve",
        Error::StepCollapse { .. } => "step_collapse",
        Error::ConeExit { .. } => "cone_exit",
        Error::Stall { .. } => "stall",
        Error::Io(_) => "io",
        Error::Parse(_) => "parse",
    }
}
