use crate::error::{invalid, Error, Result};

/// Strictly increasing tabulation of `log10(alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaGrid {
    log10: Vec<f64>,
}

impl AlphaGrid {
    pub fn from_log10(log10: Vec<f64>) -> Result<Self> {
        if log10.is_empty() {
            return Err(invalid("alpha grid is empty"));
        }
        if log10.iter().any(|v| !v.is_finite()) {
            return Err(invalid("alpha grid has non-finite entries"));
        }
        if let Some(i) = log10.windows(2).position(|w| w[1] <= w[0]) {
            return Err(invalid(format!(
                "alpha grid must be strictly increasing (entries {} and {} at index {i})",
                log10[i],
                log10[i + 1]
            )));
        }
        Ok(Self { log10 })
    }

    pub fn from_alphas(alphas: &[f64]) -> Result<Self> {
        if let Some(a) = alphas.iter().find(|a| !(**a > 0.0)) {
            return Err(invalid(format!("alpha values must be positive, got {a}")));
        }
        Self::from_log10(alphas.iter().map(|a| a.log10()).collect())
    }

    /// `count` points evenly spaced in `log10(alpha)` over `[lo, hi]`.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || !(hi > lo) {
            return Err(invalid(format!("log-spaced grid needs count >= 2 and hi > lo (got {count}, [{lo}, {hi}])")));
        }
        let step = (hi - lo) / (count - 1) as f64;
        Self::from_log10((0..count).map(|i| lo + step * i as f64).collect())
    }

    pub fn log10_values(&self) -> &[f64] {
        &self.log10
    }

    pub fn alphas(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.log10.iter().map(|l| 10f64.powf(*l))
    }

    pub fn len(&self) -> usize {
        self.log10.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log10.is_empty()
    }
}

/// Provenance of a tabulated error curve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurveMeta {
    pub id: String,
    pub noise_sd: Option<f64>,
    pub zeta: Option<f64>,
    pub seed: Option<u64>,
    pub line_count: Option<usize>,
}

impl CurveMeta {
    pub fn named(id: impl Into<String>) -> Self {
        Self { id: id.into(), ..Self::default() }
    }
}

/// Relative solution error tabulated against `log10(alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    grid: AlphaGrid,
    sigmas: Vec<f64>,
    pub meta: CurveMeta,
}

impl ErrorCurve {
    pub fn new(grid: AlphaGrid, sigmas: Vec<f64>, meta: CurveMeta) -> Result<Self> {
        if sigmas.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} sigma values for {} alpha nodes",
                sigmas.len(),
                grid.len()
            )));
        }
        if let Some(s) = sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(invalid(format!("error values must be finite and non-negative, got {s}")));
        }
        Ok(Self { grid, sigmas, meta })
    }

    /// Tabulates `f(alpha)` on the grid.
    pub fn tabulate<F: Fn(f64) -> f64>(grid: AlphaGrid, meta: CurveMeta, f: F) -> Result<Self> {
        let sigmas = grid.alphas().map(f).collect();
        Self::new(grid, sigmas, meta)
    }

    pub fn grid(&self) -> &AlphaGrid {
        &self.grid
    }

    pub fn log10_alphas(&self) -> &[f64] {
        self.grid.log10_values()
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn alpha_range(&self) -> (f64, f64) {
        let l = self.log10_alphas();
        (10f64.powf(l[0]), 10f64.powf(l[l.len() - 1]))
    }

    /// Index of the smallest tabulated error.
    pub fn argmin(&self) -> usize {
        argmin(&self.sigmas)
    }

    /// Piecewise-linear interpolation in `(log10 alpha, sigma)`.
    pub fn interpolate(&self, alpha: f64) -> Result<f64> {
        let (lo, hi) = self.alpha_range();
        let slack = 1e-12;
        if !(alpha > 0.0) || alpha < lo * (1.0 - slack) || alpha > hi * (1.0 + slack) {
            return Err(Error::Range { alpha, min: lo, max: hi });
        }
        let x = alpha.log10();
        let xs = self.log10_alphas();
        if xs.len() == 1 {
            return Ok(self.sigmas[0]);
        }
        let k = xs.partition_point(|v| *v <= x).clamp(1, xs.len() - 1);
        let t = ((x - xs[k - 1]) / (xs[k] - xs[k - 1])).clamp(0.0, 1.0);
        Ok(self.sigmas[k - 1] + t * (self.sigmas[k] - self.sigmas[k - 1]))
    }

    /// Pointwise maximum over curves sharing one tabulation.
    pub fn upper_boundary(curves: &[ErrorCurve]) -> Result<ErrorCurve> {
        Self::pointwise(curves, "upper", f64::max)
    }

    /// Pointwise minimum over curves sharing one tabulation.
    pub fn lower_boundary(curves: &[ErrorCurve]) -> Result<ErrorCurve> {
        Self::pointwise(curves, "lower", f64::min)
    }

    fn pointwise(curves: &[ErrorCurve], id: &str, pick: fn(f64, f64) -> f64) -> Result<ErrorCurve> {
        let first = curves.first().ok_or_else(|| invalid("no curves to aggregate"))?;
        let mut sigmas = first.sigmas.clone();
        for c in &curves[1..] {
            if c.grid != first.grid {
                return Err(Error::Dimension(format!(
                    "curve '{}' uses a different alpha tabulation than '{}'",
                    c.meta.id, first.meta.id
                )));
            }
            for (s, v) in sigmas.iter_mut().zip(&c.sigmas) {
                *s = pick(*s, *v);
            }
        }
        Self::new(first.grid.clone(), sigmas, CurveMeta::named(id))
    }
}

pub(crate) fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) })
        .0
}
