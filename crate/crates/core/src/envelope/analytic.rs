use super::EnvelopeParams;
use super::curve::ErrorCurve;
use crate::error::{invalid, Error, Result};

/// Outcome of fitting the truncation level `g` to error curves.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactResult {
    pub g: f64,
    pub alpha_g: f64,
    pub epsilon_at_contact: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(alpha_i, g_i)` per iteration; empty for the scan.
    pub trace: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticOptions {
    /// Stop once the relative change of alpha falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Truncation level used for the starting value `alpha_0 = chi(g_init)`.
    pub g_init: f64,
}

impl Default for AnalyticOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100, g_init: 10f64.powf(-1.5) }
    }
}

/// Solves the contact system
///
/// ```text
/// eps(alpha; g) = sigma(alpha),   alpha = chi(g) (alpha + g)^(4/3)
/// ```
///
/// by alternating the minimizer map for alpha with the closed form
/// `g = alpha [ (sigma(alpha) - norm_A eta / (2 sqrt(alpha)))^(-1) - 1 ]`.
///
/// `sigma` is the curve interpolated in log-alpha. Iterates that leave the
/// tabulated range are clamped to it; a clamped final iterate is a range error.
pub fn fit_g_analytic(curve: &ErrorCurve, norm_a: f64, eta: f64, opts: &AnalyticOptions) -> Result<ContactResult> {
    if !(eta > 0.0) {
        return Err(invalid(format!("eta must be positive for the contact system, got {eta}")));
    }
    if !(norm_a > 0.0) {
        return Err(invalid(format!("operator norm must be positive, got {norm_a}")));
    }
    let (lo, hi) = curve.alpha_range();
    let clamp = |a: f64| if a.is_finite() { a.clamp(lo, hi) } else { hi };

    let start = EnvelopeParams::new(norm_a, eta, opts.g_init)?;
    let mut alpha = clamp(start.chi());
    let mut g = contact_g(curve, &start, alpha)?;
    let mut trace = vec![(alpha, g)];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let p = start.with_g(g)?;
        let next = clamp(p.fixed_point_map(alpha));
        let change = (next - alpha).abs() / alpha;
        alpha = next;
        g = contact_g(curve, &start, alpha)?;
        trace.push((alpha, g));
        if change < opts.tol {
            converged = true;
            break;
        }
    }

    let at_edge = (alpha - lo).abs() <= 1e-12 * lo || (alpha - hi).abs() <= 1e-12 * hi;
    if converged && at_edge {
        return Err(Error::Range { alpha, min: lo, max: hi });
    }
    let fitted = start.with_g(g)?;
    Ok(ContactResult {
        g,
        alpha_g: alpha,
        epsilon_at_contact: fitted.value(alpha),
        iterations,
        converged,
        trace,
    })
}

/// `g` for which the envelope passes through the curve at `alpha`.
fn contact_g(curve: &ErrorCurve, p: &EnvelopeParams, alpha: f64) -> Result<f64> {
    let sigma = curve.interpolate(alpha)?;
    let data_term = p.data_term(alpha);
    let gap = sigma - data_term;
    let g = alpha * (1.0 / gap - 1.0);
    if !(gap > 0.0) || !(g > 0.0) || !g.is_finite() {
        return Err(Error::InfeasibleContact { alpha, sigma, data_term });
    }
    Ok(g)
}
