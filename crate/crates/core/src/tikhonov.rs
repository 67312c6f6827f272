//! Zero-order Tikhonov regularization of the discretized first-kind equation.
//!
//! The regularized solution solves `(alpha I + M^T M) y = M^T f`, where `M` is
//! the stored quadrature matrix. Norms of functions are quadrature-weighted L2
//! norms; the operator norm is the spectral norm between those weighted spaces.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::spectral::{weighted_norm, DiscreteOperator, Spectrum, SpectrumKind};

/// Relative errors of the right-hand side and of the operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    delta_rel: f64,
    xi_rel: f64,
}

impl ErrorBudget {
    pub fn new(delta_rel: f64, xi_rel: f64) -> Result<Self> {
        if !(delta_rel.is_finite() && delta_rel >= 0.0 && xi_rel.is_finite() && xi_rel >= 0.0) {
            return Err(invalid(format!(
                "relative errors must be non-negative, got delta_rel={delta_rel}, xi_rel={xi_rel}"
            )));
        }
        Ok(Self { delta_rel, xi_rel })
    }

    pub fn delta_rel(&self) -> f64 {
        self.delta_rel
    }

    pub fn xi_rel(&self) -> f64 {
        self.xi_rel
    }

    pub fn eta(&self) -> f64 {
        self.delta_rel + self.xi_rel
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedSolution {
    pub alpha: f64,
    pub spectrum: Spectrum,
    /// Weighted L2 norm of `M y_alpha - f` on the target grid.
    pub residual_norm: f64,
}

/// Normal equations `M^T M` and `M^T f` for one right-hand side, reused
/// across many values of alpha.
#[derive(Debug)]
pub struct NormalEquations<'a> {
    op: &'a DiscreteOperator,
    f: &'a Spectrum,
    rhs: DVector<f64>,
}

impl<'a> NormalEquations<'a> {
    pub fn new(op: &'a DiscreteOperator, f: &'a Spectrum) -> Result<Self> {
        op.target_grid().ensure_matches(f.grid(), "right-hand side")?;
        let rhs = op.matrix().tr_mul(&DVector::from_column_slice(f.values()));
        Ok(Self { op, f, rhs })
    }

    pub fn solve(&self, alpha: f64) -> Result<RegularizedSolution> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid(format!("regularization parameter must be positive, got {alpha}")));
        }
        let mut system: DMatrix<f64> = self.op.gram().clone();
        for i in 0..system.nrows() {
            system[(i, i)] += alpha;
        }
        let chol = system
            .cholesky()
            .ok_or_else(|| Error::Numeric(format!("alpha I + B is not positive definite at alpha = {alpha:e}")))?;
        let y = chol.solve(&self.rhs);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite solution at alpha = {alpha:e}")));
        }
        let residual = self.op.matrix() * &y - DVector::from_column_slice(self.f.values());
        let residual_norm = weighted_norm(residual.as_slice(), self.op.target_weights());
        let spectrum = Spectrum::new(*self.op.source_grid(), y.as_slice().to_vec(), SpectrumKind::Restored)?;
        Ok(RegularizedSolution { alpha, spectrum, residual_norm })
    }
}

pub fn solve_tikhonov(op: &DiscreteOperator, f: &Spectrum, alpha: f64) -> Result<RegularizedSolution> {
    NormalEquations::new(op, f)?.solve(alpha)
}

/// Largest singular value of the operator between weighted L2 spaces.
pub fn operator_norm(op: &DiscreteOperator) -> f64 {
    op.weighted_singular_values().first().copied().unwrap_or(0.0)
}

/// Smallest eigenvalue of `B = A^* A`, the square of the smallest singular value.
///
/// For a wide matrix (fewer rows than columns) `B` is singular and this is 0.
pub fn min_singular_of_b(op: &DiscreteOperator) -> f64 {
    let m = op.matrix();
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    op.weighted_singular_values().last().map(|s| s * s).unwrap_or(0.0)
}

/// Gain `sigma / (alpha + sigma^2)` applied by Tikhonov filtering to a
/// singular component; bounded by `1 / (2 sqrt(alpha))`.
pub fn filter_gain(sigma: f64, alpha: f64) -> f64 {
    sigma / (alpha + sigma * sigma)
}

/// Classical a priori bound on the relative error,
/// `norm_A eta / (2 sqrt(alpha)) + alpha / (alpha + mu_min)`.
///
/// With `mu_min = 0` the second term is identically 1 and the bound has no minimum.
pub fn classical_bound(alpha: f64, norm_a: f64, budget: &ErrorBudget, mu_min: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid(format!("regularization parameter must be positive, got {alpha}")));
    }
    if !(mu_min.is_finite() && mu_min >= 0.0) {
        return Err(invalid(format!("mu_min must be non-negative, got {mu_min}")));
    }
    Ok(norm_a * budget.eta() / (2.0 * alpha.sqrt()) + alpha / (alpha + mu_min))
}

/// `||y_alpha - y|| / ||y||` in the weighted L2 norm of the common grid.
pub fn relative_error(y_alpha: &Spectrum, y_exact: &Spectrum) -> Result<f64> {
    y_exact.grid().ensure_matches(y_alpha.grid(), "relative_error")?;
    let denom = y_exact.norm();
    if denom == 0.0 {
        return Err(invalid("exact spectrum has zero norm"));
    }
    let w = y_exact.grid().trapezoid_weights();
    let diff: Vec<f64> = y_alpha.values().iter().zip(y_exact.values()).map(|(a, b)| a - b).collect();
    Ok(weighted_norm(&diff, &w) / denom)
}
