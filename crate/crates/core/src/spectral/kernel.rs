use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Dispersion (Lorentzian) spread function of a spectral device whose width at
/// half height grows linearly with wavelength: `omega(lambda) = q (1 + zeta) lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadFunctionModel {
    q: f64,
    zeta: f64,
}

impl SpreadFunctionModel {
    pub fn new(q: f64, zeta: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(invalid(format!("width ratio q must be positive, got {q}")));
        }
        if !(zeta.is_finite() && q * (1.0 + zeta) > 0.0) {
            return Err(invalid(format!("effective width factor q(1+zeta) must be positive, got q={q}, zeta={zeta}")));
        }
        Ok(Self { q, zeta })
    }

    /// Unperturbed model with `zeta = 0`.
    pub fn unperturbed(q: f64) -> Result<Self> {
        Self::new(q, 0.0)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Same `q` with a different width perturbation.
    pub fn with_zeta(&self, zeta: f64) -> Result<Self> {
        Self::new(self.q, zeta)
    }

    pub fn width_factor(&self) -> f64 {
        self.q * (1.0 + self.zeta)
    }

    pub fn width(&self, lambda: f64) -> Result<f64> {
        sf_width(lambda, self)
    }

    /// Kernel value `K(lambda, lambda_prime)`; the width follows the first argument.
    pub fn kernel(&self, lambda: f64, lambda_prime: f64) -> Result<f64> {
        dispersion_kernel(lambda, lambda_prime, self)
    }

    // Hot path for matrix assembly; callers guarantee lambda > 0.
    pub(crate) fn kernel_unchecked(&self, lambda: f64, lambda_prime: f64) -> f64 {
        lorentzian(self.width_factor() * lambda, lambda - lambda_prime)
    }

    /// Peak height `2 / (pi * omega(lambda))`, attained at `lambda_prime = lambda`.
    pub fn peak_height(&self, lambda: f64) -> Result<f64> {
        Ok(2.0 / (PI * self.width(lambda)?))
    }
}

fn lorentzian(omega: f64, offset: f64) -> f64 {
    let half = 0.5 * omega;
    (omega / (2.0 * PI)) / (offset * offset + half * half)
}

/// Full width at half height of the spread function at `lambda` (nm).
pub fn sf_width(lambda: f64, model: &SpreadFunctionModel) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid(format!("wavelength must be positive, got {lambda}")));
    }
    Ok(model.width_factor() * lambda)
}

pub fn dispersion_kernel(lambda: f64, lambda_prime: f64, model: &SpreadFunctionModel) -> Result<f64> {
    let omega = sf_width(lambda, model)?;
    if !lambda_prime.is_finite() {
        return Err(invalid(format!("wavelength must be finite, got {lambda_prime}")));
    }
    Ok(lorentzian(omega, lambda - lambda_prime))
}

/// Area-to-height ratio of the dispersion spread function, `(pi/2) omega`.
pub fn integral_width(omega: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(invalid(format!("width must be positive, got {omega}")));
    }
    Ok(0.5 * PI * omega)
}
