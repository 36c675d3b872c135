//! Lightning solver for two-dimensional Stokes flow in polygonal and curved domains.
//!
//! The stream function is written as `psi = Im(conj(z) f(z) + g(z))` with `f` and `g`
//! rational functions whose poles cluster exponentially at the corners of the domain.

// Argument checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod basis;
pub mod cases;
pub mod dense;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod moffatt;
pub mod solver;

pub use error::{Result, StokesError};
pub use num_complex::Complex64;
