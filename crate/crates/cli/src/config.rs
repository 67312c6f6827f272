//! Run configuration: a sectioned TOML file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use speckit_core::envelope::{AlphaGrid, AnalyticOptions, ScanOptions};
use speckit_core::spectral::{SpreadFunctionModel, WavelengthGrid};
use speckit_core::training::{EtaRule, FitMode, GaussianLine, LineSet, OriginalExample, TrainingSpec};

use crate::error::{io_at, CliError, CliResult};

pub const SECTIONS: [&str; 9] = ["grids", "kernel", "lines", "noise", "alphas", "seeds", "training", "fit", "io"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsSection {
    pub target_start: f64,
    pub target_step: f64,
    pub target_count: usize,
    pub source_start: f64,
    pub source_step: f64,
    pub source_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub q: f64,
    /// Width perturbation of the operator assumed when restoring the measured spectrum.
    #[serde(default)]
    pub zeta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineTable {
    pub centers: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub sigmas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinesSection {
    /// Names of the training line sets, in ensemble order.
    pub training: Vec<String>,
    /// Name of the line set of the simulated measurement.
    pub original: String,
    pub sets: BTreeMap<String, LineTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub sds: Vec<f64>,
    pub original_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphasSection {
    pub log10_min: f64,
    pub log10_max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedsSection {
    pub training: Vec<u64>,
    pub original: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    pub zetas: Vec<f64>,
    /// `mean`, `max` or `fixed`.
    pub eta_rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub mode: String,
    pub g_log10_min: f64,
    pub g_log10_max: f64,
    pub g_count: usize,
    pub slack: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub g_init: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    /// Measured spectrum to restore; relative paths are taken from the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured: Option<String>,
    /// Optional exact spectrum used only to report the true restoration error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grids: GridsSection,
    pub kernel: KernelSection,
    pub lines: LinesSection,
    pub noise: NoiseSection,
    pub alphas: AlphasSection,
    pub seeds: SeedsSection,
    pub training: TrainingSection,
    pub fit: FitSection,
    pub io: IoSection,
}

fn cfg(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn section<T: for<'de> Deserialize<'de>>(table: &toml::Table, name: &str) -> CliResult<T> {
    let value = table.get(name).ok_or_else(|| cfg(format!("missing config section [{name}]")))?;
    value.clone().try_into().map_err(|e: toml::de::Error| cfg(format!("section [{name}]: {}", e.message())))
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| cfg(e.to_string()))?;
        if let Some(k) = table.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(cfg(format!("unknown config section [{k}]")));
        }
        let config = Self {
            grids: section(&table, "grids")?,
            kernel: section(&table, "kernel")?,
            lines: section(&table, "lines")?,
            noise: section(&table, "noise")?,
            alphas: section(&table, "alphas")?,
            seeds: section(&table, "seeds")?,
            training: section(&table, "training")?,
            fit: section(&table, "fit")?,
            io: section(&table, "io")?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_at(path))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        self.training_spec()?.validate()?;
        self.original()?;
        self.assumed_model()?;
        self.mode()?;
        if !(self.noise.original_sd.is_finite() && self.noise.original_sd > 0.0) {
            return Err(cfg(format!("[noise] original_sd must be positive, got {}", self.noise.original_sd)));
        }
        Ok(())
    }

    /// Replaces every seed: the measurement noise uses `seed`, training
    /// replicate `k` uses `seed + k`.
    pub fn override_seed(&mut self, seed: u64) {
        self.seeds.original = seed;
        for (k, s) in self.seeds.training.iter_mut().enumerate() {
            *s = seed.wrapping_add(k as u64);
        }
    }

    pub fn target_grid(&self) -> CliResult<WavelengthGrid> {
        let g = &self.grids;
        WavelengthGrid::new(g.target_start, g.target_step, g.target_count).map_err(|e| cfg(format!("[grids] target: {e}")))
    }

    pub fn source_grid(&self) -> CliResult<WavelengthGrid> {
        let g = &self.grids;
        WavelengthGrid::new(g.source_start, g.source_step, g.source_count).map_err(|e| cfg(format!("[grids] source: {e}")))
    }

    /// Operator assumed for the restoration.
    pub fn assumed_model(&self) -> CliResult<SpreadFunctionModel> {
        SpreadFunctionModel::new(self.kernel.q, self.kernel.zeta).map_err(|e| cfg(format!("[kernel]: {e}")))
    }

    pub fn mode(&self) -> CliResult<FitMode> {
        self.fit.mode.parse().map_err(|e: speckit_core::Error| cfg(format!("[fit] mode: {e}")))
    }

    fn line_set(&self, name: &str) -> CliResult<LineSet> {
        let t = self.lines.sets.get(name).ok_or_else(|| cfg(format!("[lines] set {name:?} is not defined")))?;
        if t.centers.len() != t.amplitudes.len() || t.centers.len() != t.sigmas.len() {
            return Err(cfg(format!("[lines.sets.{name}] centers, amplitudes and sigmas differ in length")));
        }
        let lines = (0..t.centers.len())
            .map(|i| GaussianLine::new(t.centers[i], t.amplitudes[i], t.sigmas[i]))
            .collect::<speckit_core::Result<Vec<_>>>()
            .map_err(|e| cfg(format!("[lines.sets.{name}]: {e}")))?;
        Ok(LineSet { name: name.to_string(), lines })
    }

    pub fn original(&self) -> CliResult<OriginalExample> {
        Ok(OriginalExample {
            lines: self.line_set(&self.lines.original)?,
            noise_sd: self.noise.original_sd,
            seed: self.seeds.original,
        })
    }

    pub fn eta_rule(&self) -> CliResult<EtaRule> {
        match (self.training.eta_rule.as_str(), self.training.eta) {
            ("mean", None) => Ok(EtaRule::Mean),
            ("max", None) => Ok(EtaRule::Max),
            ("fixed", Some(eta)) => Ok(EtaRule::Fixed(eta)),
            ("fixed", None) => Err(cfg("[training] eta_rule = \"fixed\" needs eta")),
            ("mean" | "max", Some(_)) => Err(cfg("[training] eta is only used with eta_rule = \"fixed\"")),
            (other, _) => Err(cfg(format!("[training] unknown eta_rule {other:?}, expected mean, max or fixed"))),
        }
    }

    pub fn training_spec(&self) -> CliResult<TrainingSpec> {
        let a = &self.alphas;
        let alpha_grid =
            AlphaGrid::log_spaced(a.log10_min, a.log10_max, a.count).map_err(|e| cfg(format!("[alphas]: {e}")))?;
        let f = &self.fit;
        if f.g_count == 0 || f.g_log10_min.partial_cmp(&f.g_log10_max).is_none_or(|o| o.is_gt()) {
            return Err(cfg("[fit] g grid must be non-empty with g_log10_min <= g_log10_max"));
        }
        let g_grid = if f.g_count == 1 {
            vec![10f64.powf(f.g_log10_min)]
        } else {
            let step = (f.g_log10_max - f.g_log10_min) / (f.g_count - 1) as f64;
            (0..f.g_count).map(|k| 10f64.powf(f.g_log10_min + step * k as f64)).collect()
        };
        if !(f.slack.is_finite() && f.slack >= 0.0) || !(f.tol.is_finite() && f.tol >= 0.0) {
            return Err(cfg("[fit] slack and tol must be non-negative"));
        }
        if !(f.g_init.is_finite() && f.g_init > 0.0) || f.max_iter == 0 {
            return Err(cfg("[fit] g_init must be positive and max_iter at least 1"));
        }
        let line_sets = self.lines.training.iter().map(|n| self.line_set(n)).collect::<CliResult<Vec<_>>>()?;
        let spec = TrainingSpec {
            target: self.target_grid()?,
            source: self.source_grid()?,
            q: self.kernel.q,
            line_sets,
            noise_sds: self.noise.sds.clone(),
            zeta_values: self.training.zetas.clone(),
            alpha_grid,
            seeds: self.seeds.training.clone(),
            eta_rule: self.eta_rule()?,
            g_grid,
            scan: ScanOptions { slack: f.slack },
            analytic: AnalyticOptions { tol: f.tol, max_iter: f.max_iter, g_init: f.g_init },
        };
        spec.validate().map_err(|e| cfg(e.to_string()))?;
        Ok(spec)
    }

    /// Output directory: the command-line value, else `[io] out_dir`, else `out`.
    pub fn out_dir(&self, cli: Option<&Path>) -> PathBuf {
        match (cli, &self.io.out_dir) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(d)) => PathBuf::from(d),
            (None, None) => PathBuf::from("out"),
        }
    }
}
