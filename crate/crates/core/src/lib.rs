//! Numerical toolkit for the Hardy-Sobolev equation
//! `-Delta u - gamma u/|x|^2 = C_gamma |u|^{p_s-2} u / |x|^s` in `R^N`.

pub mod banded;
pub mod closed_forms;
pub mod continuation;
pub mod error;
pub mod grid;
pub mod harmonics;
pub mod params;
pub mod pde2d;
pub mod spectral;
pub mod tridiag;

pub use error::{Error, Result};
pub use params::{DerivedConstants, ProblemParams, SymmetryClass};

/// Crate version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
