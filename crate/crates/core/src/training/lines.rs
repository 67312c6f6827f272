use crate::error::{invalid, Result};
use crate::spectral::{Spectrum, SpectrumKind, WavelengthGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLine {
    pub center: f64,
    pub amplitude: f64,
    /// Standard width (nm), not the half width.
    pub sigma: f64,
}

impl GaussianLine {
    pub fn new(center: f64, amplitude: f64, sigma: f64) -> Result<Self> {
        let line = Self { center, amplitude, sigma };
        line.validate()?;
        Ok(line)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() {
            return Err(invalid(format!("line center must be finite, got {}", self.center)));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(invalid(format!("line amplitude must be non-negative, got {}", self.amplitude)));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(invalid(format!("line sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    pub fn value(&self, lambda: f64) -> f64 {
        let d = lambda - self.center;
        self.amplitude * (-d * d / (2.0 * self.sigma * self.sigma)).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSet {
    pub name: String,
    pub lines: Vec<GaussianLine>,
}

impl LineSet {
    pub fn new(name: impl Into<String>, lines: Vec<GaussianLine>) -> Result<Self> {
        for l in &lines {
            l.validate()?;
        }
        Ok(Self { name: name.into(), lines })
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

pub fn synth_spectrum(lines: &[GaussianLine], grid: &WavelengthGrid) -> Spectrum {
    let values = grid.nodes().map(|x| lines.iter().map(|l| l.value(x)).sum()).collect();
    Spectrum::new(*grid, values, SpectrumKind::Exact).expect("Gaussian sums are finite")
}

// (center, amplitude, sigma)
const NINE: [(f64, f64, f64); 9] = [
    (507.0, 2.8, 2.75),
    (519.0, 8.0, 2.75),
    (531.0, 6.4, 2.75),
    (543.0, 2.8, 2.75),
    (560.0, 4.8, 3.85),
    (580.0, 5.6, 4.4),
    (600.0, 4.0, 3.3),
    (614.0, 7.2, 2.75),
    (626.0, 6.0, 2.75),
];

fn line(&(center, amplitude, sigma): &(f64, f64, f64)) -> GaussianLine {
    GaussianLine { center, amplitude, sigma }
}

/// Nine lines: close pairs near 525 and 620 nm, weak lines at 507 and 543 nm.
pub fn nine_line_set() -> LineSet {
    LineSet { name: "nine".into(), lines: NINE.iter().map(line).collect() }
}

/// The 620 nm pair merged into one broader line.
pub fn eight_line_set() -> LineSet {
    let mut lines: Vec<GaussianLine> = NINE[..7].iter().map(line).collect();
    lines.push(line(&(620.0, 12.0, 3.85)));
    LineSet { name: "eight".into(), lines }
}

/// The 580 nm line split into a narrow doublet.
pub fn ten_line_set() -> LineSet {
    let mut lines: Vec<GaussianLine> = NINE.iter().filter(|l| l.0 != 580.0).map(line).collect();
    lines.push(line(&(577.0, 4.0, 1.0)));
    lines.push(line(&(583.0, 3.6, 1.0)));
    lines.sort_by(|a, b| a.center.total_cmp(&b.center));
    LineSet { name: "ten".into(), lines }
}

pub fn default_line_sets() -> Vec<LineSet> {
    vec![eight_line_set(), nine_line_set(), ten_line_set()]
}

/// Local maxima of `values` strictly above `rel_threshold` times the global
/// maximum. Plateaus count once, end points never.
pub fn count_local_maxima(values: &[f64], rel_threshold: f64) -> usize {
    let peak = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return 0;
    }
    let level = rel_threshold * peak;
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] > level)
        .count()
}
