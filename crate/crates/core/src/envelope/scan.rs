use super::analytic::ContactResult;
use super::curve::{argmin, AlphaGrid, ErrorCurve};
use super::EnvelopeParams;
use crate::error::{invalid, Error, Result};

/// 25 log-spaced truncation levels in `[1e-3, 1]`.
pub fn default_g_grid() -> Vec<f64> {
    (0..25).map(|k| 10f64.powf(-3.0 + 3.0 * k as f64 / 24.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Absolute amount by which the envelope may dip below the curves.
    pub slack: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { slack: 1e-6 }
    }
}

/// Envelopes for every `g` of a scan, tabulated on the curves' alpha grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFamily {
    pub grid: AlphaGrid,
    pub g_values: Vec<f64>,
    /// `values[k][i]` is `eps(alpha_i; g_values[k])`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanFit {
    pub contact: ContactResult,
    pub upper: ErrorCurve,
    /// `log10(alpha)` where the fitted envelope comes closest to the upper curve.
    pub touch_log10_alpha: f64,
    pub family: EnvelopeFamily,
}

/// Picks the largest `g` whose envelope lies above the upper boundary of all
/// curves at every tabulated alpha (up to `opts.slack`). The reported `alpha_g`
/// is the tabulated minimizer of that envelope.
pub fn fit_g_scan(
    curves: &[ErrorCurve],
    g_grid: &[f64],
    norm_a: f64,
    eta: f64,
    opts: &ScanOptions,
) -> Result<ScanFit> {
    if g_grid.is_empty() {
        return Err(invalid("g grid is empty"));
    }
    let upper = ErrorCurve::upper_boundary(curves)?;
    let grid = upper.grid().clone();
    let alphas: Vec<f64> = grid.alphas().collect();

    let mut values = Vec::with_capacity(g_grid.len());
    let mut best: Option<(f64, usize)> = None;
    for (k, &g) in g_grid.iter().enumerate() {
        let p = EnvelopeParams::new(norm_a, eta, g)?;
        let eps: Vec<f64> = alphas.iter().map(|&a| p.value(a)).collect();
        let dominates = eps.iter().zip(upper.sigmas()).all(|(e, s)| *e >= s - opts.slack);
        if dominates && best.is_none_or(|(bg, _)| g > bg) {
            best = Some((g, k));
        }
        values.push(eps);
    }

    let Some((g, k)) = best else {
        let largest_g = g_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::NoContact { largest_g });
    };
    let eps = &values[k];
    let i_min = argmin(eps);
    let gaps: Vec<f64> = eps.iter().zip(upper.sigmas()).map(|(e, s)| e - s).collect();
    let i_touch = argmin(&gaps);
    let contact = ContactResult {
        g,
        alpha_g: alphas[i_min],
        epsilon_at_contact: eps[i_min],
        iterations: g_grid.len(),
        converged: true,
        trace: Vec::new(),
    };
    Ok(ScanFit {
        contact,
        touch_log10_alpha: grid.log10_values()[i_touch],
        upper,
        family: EnvelopeFamily { grid, g_values: g_grid.to_vec(), values },
    })
}
