use super::lines::{default_line_sets, nine_line_set, LineSet};
use crate::envelope::{default_g_grid, AlphaGrid, AnalyticOptions, ScanOptions};
use crate::error::{invalid, Result};
use crate::spectral::WavelengthGrid;

/// How the combined relative error `eta = delta_rel + xi_rel` is estimated
/// from the realized perturbations of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaRule {
    /// Mean realized `delta_rel` plus mean realized `xi_rel`.
    Mean,
    /// Largest realized `delta_rel` plus largest realized `xi_rel`.
    Max,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSpec {
    pub target: WavelengthGrid,
    pub source: WavelengthGrid,
    /// Base width ratio of the spread function.
    pub q: f64,
    pub line_sets: Vec<LineSet>,
    pub noise_sds: Vec<f64>,
    pub zeta_values: Vec<f64>,
    pub alpha_grid: AlphaGrid,
    pub seeds: Vec<u64>,
    pub eta_rule: EtaRule,
    pub g_grid: Vec<f64>,
    pub scan: ScanOptions,
    pub analytic: AnalyticOptions,
}

impl TrainingSpec {
    /// 3 line sets x 4 noise levels x 3 width perturbations x 2 seeds on the
    /// 450..650 / 460..640 nm grids with `q = 0.015`.
    pub fn reference_default() -> Self {
        Self {
            target: WavelengthGrid::new(450.0, 1.0, 201).expect("valid grid"),
            source: WavelengthGrid::new(460.0, 1.0, 181).expect("valid grid"),
            q: 0.015,
            line_sets: default_line_sets(),
            noise_sds: vec![0.01, 0.02, 0.03, 0.04],
            zeta_values: vec![-0.02, 0.01, 0.04],
            alpha_grid: AlphaGrid::log_spaced(-6.0, 0.0, 41).expect("valid grid"),
            seeds: vec![1, 2],
            eta_rule: EtaRule::Mean,
            g_grid: default_g_grid(),
            scan: ScanOptions::default(),
            analytic: AnalyticOptions::default(),
        }
    }

    pub fn member_count(&self) -> usize {
        self.line_sets.len() * self.noise_sds.len() * self.zeta_values.len() * self.seeds.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.line_sets.is_empty() {
            return Err(invalid("training spec needs at least one line set"));
        }
        for set in &self.line_sets {
            for l in &set.lines {
                l.validate()?;
            }
        }
        if self.noise_sds.is_empty() || self.zeta_values.is_empty() || self.seeds.is_empty() {
            return Err(invalid("training spec needs at least one noise level, zeta value and seed"));
        }
        if let Some(sd) = self.noise_sds.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(invalid(format!("noise standard deviations must be positive, got {sd}")));
        }
        if let Some(z) = self.zeta_values.iter().find(|z| !(z.is_finite() && self.q * (1.0 + **z) > 0.0)) {
            return Err(invalid(format!("zeta = {z} gives a non-positive width")));
        }
        if !(self.q.is_finite() && self.q > 0.0) {
            return Err(invalid(format!("q must be positive, got {}", self.q)));
        }
        if self.target.start() <= 0.0 {
            return Err(invalid("target wavelengths must be positive"));
        }
        if self.alpha_grid.len() < 2 {
            return Err(invalid("alpha grid needs at least two points"));
        }
        if let EtaRule::Fixed(eta) = self.eta_rule {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(invalid(format!("fixed eta must be positive, got {eta}")));
            }
        }
        if self.g_grid.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(invalid("g grid values must be positive"));
        }
        Ok(())
    }

    /// Copy with all noise levels and width perturbations multiplied by `factor`.
    pub fn scaled_errors(&self, factor: f64) -> Self {
        let mut s = self.clone();
        s.noise_sds.iter_mut().for_each(|v| *v *= factor);
        s.zeta_values.iter_mut().for_each(|v| *v *= factor);
        s
    }
}

/// The original example: the nine-line spectrum measured with the unperturbed
/// operator and white noise.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginalExample {
    pub lines: LineSet,
    pub noise_sd: f64,
    pub seed: u64,
}

impl OriginalExample {
    pub fn reference_default() -> Self {
        Self { lines: nine_line_set(), noise_sd: 0.02, seed: 2024 }
    }
}
