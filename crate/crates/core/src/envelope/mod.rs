//! Truncated-spectrum error envelope and estimation of the truncation level `g`.
//!
//! The envelope
//!
//! ```text
//! eps(alpha) = norm_A * eta / (2 sqrt(alpha)) + alpha / (alpha + g)
//! ```
//!
//! replaces the (near-zero) smallest eigenvalue of `A^* A` in the classical
//! bound by a level `g > 0`. It has a unique interior minimum when
//! `norm_A * eta / sqrt(g) < 3 sqrt(3) / 4`. The truncation level is fitted so
//! that the envelope touches the relative-error curves of training examples,
//! either by fixed-point iteration on the contact system or by scanning a grid
//! of `g` values.

mod analytic;
mod curve;
mod scan;

pub use analytic::{fit_g_analytic, AnalyticOptions, ContactResult};
pub use curve::{AlphaGrid, CurveMeta, ErrorCurve};
pub use scan::{default_g_grid, fit_g_scan, EnvelopeFamily, ScanFit, ScanOptions};

use crate::error::{invalid, Error, Result};

/// `3 sqrt(3) / 4`, the bound in the minimum-existence condition.
pub const MIN_EXISTENCE_BOUND: f64 = 1.299_038_105_676_658;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    norm_a: f64,
    eta: f64,
    g: f64,
}

impl EnvelopeParams {
    pub fn new(norm_a: f64, eta: f64, g: f64) -> Result<Self> {
        if !(norm_a.is_finite() && norm_a >= 0.0) {
            return Err(invalid(format!("operator norm must be non-negative, got {norm_a}")));
        }
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(invalid(format!("eta must be non-negative, got {eta}")));
        }
        if !(g.is_finite() && g > 0.0) {
            return Err(invalid(format!("truncation level g must be positive, got {g}")));
        }
        Ok(Self { norm_a, eta, g })
    }

    pub fn norm_a(&self) -> f64 {
        self.norm_a
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        Self::new(self.norm_a, self.eta, g)
    }

    /// The data-error term `norm_A eta / (2 sqrt(alpha))`.
    pub fn data_term(&self, alpha: f64) -> f64 {
        self.norm_a * self.eta / (2.0 * alpha.sqrt())
    }

    /// Envelope value at `alpha`; `alpha` must be positive.
    pub fn value(&self, alpha: f64) -> f64 {
        self.data_term(alpha) + alpha / (alpha + self.g)
    }

    /// Prefactor `chi = (norm_A eta / (4 g))^(2/3)` of the minimizer equation.
    pub fn chi(&self) -> f64 {
        (self.norm_a * self.eta / (4.0 * self.g)).powf(2.0 / 3.0)
    }

    /// Right-hand side `F(alpha) = chi (alpha + g)^(4/3)` of the minimizer equation.
    pub fn fixed_point_map(&self, alpha: f64) -> f64 {
        self.chi() * (alpha + self.g).powf(4.0 / 3.0)
    }

    /// Left side `norm_A eta / sqrt(g)` of the minimum-existence condition.
    pub fn existence_lhs(&self) -> f64 {
        self.norm_a * self.eta / self.g.sqrt()
    }
}

pub fn envelope_value(alpha: f64, p: &EnvelopeParams) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid(format!("regularization parameter must be positive, got {alpha}")));
    }
    Ok(p.value(alpha))
}

pub fn has_unique_minimum(p: &EnvelopeParams) -> bool {
    p.existence_lhs() < MIN_EXISTENCE_BOUND
}

/// The unique minimizer of the envelope: the smallest root of
/// `alpha = chi (alpha + g)^(4/3)`.
///
/// `h(alpha) = alpha - F(alpha)` is negative at 0 and increasing up to the
/// point where `F' = 1`; the root is bracketed there and found by bisection.
pub fn minimize_envelope(p: &EnvelopeParams) -> Result<f64> {
    if !has_unique_minimum(p) {
        return Err(Error::NoMinimum { lhs: p.existence_lhs(), bound: MIN_EXISTENCE_BOUND });
    }
    let chi = p.chi();
    if chi == 0.0 {
        return Err(invalid("envelope minimum degenerates to alpha = 0 when norm_A * eta = 0"));
    }
    // F'(alpha) = (4/3) chi (alpha + g)^(1/3) = 1
    let turn = (0.75 / chi).powi(3) - p.g;
    let h = |a: f64| a - p.fixed_point_map(a);
    let (mut lo, mut hi) = (0.0, turn.max(0.0));
    if h(hi) < 0.0 {
        return Err(Error::NoMinimum { lhs: p.existence_lhs(), bound: MIN_EXISTENCE_BOUND });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
