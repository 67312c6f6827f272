use std::fmt;

use crate::error::{invalid, Error, Result};

/// Uniform sampling of a closed wavelength interval.
///
/// Nodes are `start + i * step` for `i = 0..count`, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavelengthGrid {
    start: f64,
    step: f64,
    count: usize,
}

impl WavelengthGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !start.is_finite() {
            return Err(invalid(format!("grid start must be finite, got {start}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid(format!("grid step must be positive, got {step}")));
        }
        if count < 2 {
            return Err(invalid(format!("grid needs at least 2 nodes, got {count}")));
        }
        Ok(Self { start, step, count })
    }

    /// Grid covering `[start, end]` with the given step; the interval length
    /// must be an integer multiple of the step.
    pub fn from_range(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid(format!("grid step must be positive, got {step}")));
        }
        let steps = (end - start) / step;
        let rounded = steps.round();
        if !(rounded >= 1.0) || (steps - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(invalid(format!(
                "interval [{start}, {end}] is not a positive multiple of step {step}"
            )));
        }
        Self::new(start, step, rounded as usize + 1)
    }

    /// Infers a grid from explicit node positions, requiring uniform spacing.
    pub fn from_nodes(nodes: &[f64]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(invalid(format!("grid needs at least 2 nodes, got {}", nodes.len())));
        }
        let start = nodes[0];
        let step = (nodes[nodes.len() - 1] - start) / (nodes.len() - 1) as f64;
        let grid = Self::new(start, step, nodes.len())?;
        for (i, &x) in nodes.iter().enumerate() {
            if (x - grid.node(i)).abs() > 1e-6 * step {
                return Err(invalid(format!(
                    "non-uniform node spacing at index {i}: {x} (expected {})",
                    grid.node(i)
                )));
            }
        }
        Ok(grid)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn last(&self) -> f64 {
        self.node(self.count - 1)
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.node(i))
    }

    /// Index of the node equal to `lambda`, if `lambda` lies on the grid.
    pub fn index_of(&self, lambda: f64) -> Option<usize> {
        let pos = (lambda - self.start) / self.step;
        let i = pos.round();
        if i < 0.0 || i as usize >= self.count || (pos - i).abs() > 1e-9 {
            return None;
        }
        Some(i as usize)
    }

    /// Composite trapezoid weights: `h/2` at the end nodes, `h` inside.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![self.step; self.count];
        w[0] = 0.5 * self.step;
        w[self.count - 1] = 0.5 * self.step;
        w
    }

    /// Equality up to round-off in the node positions.
    pub fn matches(&self, other: &WavelengthGrid) -> bool {
        self.count == other.count
            && (self.start - other.start).abs() <= 1e-9 * self.step
            && (self.step - other.step).abs() <= 1e-9 * self.step
    }

    pub(crate) fn ensure_matches(&self, other: &WavelengthGrid, what: &str) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!("{what}: grid {self} does not match {other}")))
        }
    }
}

impl fmt::Display for WavelengthGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] step {} ({} nodes)", self.start, self.last(), self.step, self.count)
    }
}

/// What a spectrum represents in the restoration workflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumKind {
    Exact,
    Measured,
    Restored,
}

/// Intensities sampled on a [`WavelengthGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: WavelengthGrid,
    values: Vec<f64>,
    kind: SpectrumKind,
}

impl Spectrum {
    pub fn new(grid: WavelengthGrid, values: Vec<f64>, kind: SpectrumKind) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::Dimension(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite intensity {} at node {i}", values[i])));
        }
        Ok(Self { grid, values, kind })
    }

    pub fn zeros(grid: WavelengthGrid, kind: SpectrumKind) -> Self {
        Self { grid, values: vec![0.0; grid.count()], kind }
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: SpectrumKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| v * factor).collect(), self.kind)
    }

    /// Quadrature-weighted L2 norm over the grid.
    pub fn norm(&self) -> f64 {
        weighted_norm(&self.values, &self.grid.trapezoid_weights())
    }

    /// Node wavelengths paired with intensities.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.nodes().zip(self.values.iter().copied())
    }
}

pub(crate) fn weighted_norm(values: &[f64], weights: &[f64]) -> f64 {
    values.iter().zip(weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt()
}
