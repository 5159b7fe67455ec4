//! Delta-Gamma-Normal portfolio risk.
//!
//! Value-at-Risk, Expected Shortfall and their first-order parameter
//! sensitivities by Fourier inversion of the closed-form characteristic
//! function, with a Monte Carlo historical-simulation harness to check them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod fourier;
pub mod mc;
pub mod model;
pub mod quad;

pub use num_complex::Complex64;
