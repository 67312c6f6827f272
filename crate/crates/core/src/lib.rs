//! Restoration of instrument-broadened spectra by zero-order Tikhonov
//! regularization of a first-kind Fredholm equation, with the regularization
//! parameter and an error estimate chosen from training examples.
//!
//! The pieces, bottom-up:
//!
//! - [`spectral`]: wavelength grids, spectra, the dispersion spread function
//!   `K(lambda, lambda') = (omega/2pi) / ((lambda - lambda')^2 + (omega/2)^2)`
//!   with `omega = q (1 + zeta) lambda`, and its trapezoid discretization.
//! - [`tikhonov`]: regularized solves, operator norms, classical error bounds.
//! - [`envelope`]: the truncated error envelope and fitting of its level `g`.
//! - [`training`]: synthetic training examples, alpha sweeps, selection of
//!   `alpha_g`, and restoration of the measured spectrum.
//! - [`io`]: text formats for spectra and curve tables.

// Negated comparisons reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod envelope;
pub mod error;
pub mod io;
pub mod spectral;
pub mod tikhonov;
pub mod training;

pub use error::{Error, Result};
