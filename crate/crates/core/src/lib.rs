//! Numerical laboratory for linear independence of time-frequency
//! translates: exponential polynomials, sublevel sets, Gram and determinant
//! independence tests, inequality verifiers and proof-procedure replays.

pub mod catalog;
pub mod constructions;
pub mod error;
pub mod experiment;
pub mod exppoly;
pub mod independence;
pub mod inequalities;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
