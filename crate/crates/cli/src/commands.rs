//! The five pipeline stages.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use speckit_core::envelope::{EnvelopeFamily, EnvelopeParams, ErrorCurve};
use speckit_core::io::{fmt_num, read_curves, read_spectrum, write_curves, write_envelope_table, write_spectrum};
use speckit_core::spectral::{discretize_operator, forward_apply, Spectrum, SpectrumKind, SpreadFunctionModel};
use speckit_core::tikhonov::{classical_bound, min_singular_of_b, relative_error, solve_tikhonov, ErrorBudget};
use speckit_core::training::{
    add_noise, count_local_maxima, fit_curves, run_ensemble, synth_spectrum, SelectionReport,
};

use crate::config::RunConfig;
use crate::error::{io_at, CliError, CliResult};
use crate::stage::StageDir;

pub const SIMULATE_FILES: [&str; 5] = ["exact.csv", "broadened.csv", "measured.csv", "kernel_485.csv", "kernel_620.csv"];
pub const TRAIN_FILES: [&str; 3] = ["curves.csv", "envelopes.csv", "training.toml"];
pub const RESTORE_FILES: [&str; 2] = ["restored.csv", "summary.toml"];

/// Wavelengths of the kernel cross-sections written by `simulate`.
pub const KERNEL_SECTIONS: [f64; 2] = [485.0, 620.0];

const UPPER_ID: &str = "upper";
const LOWER_ID: &str = "lower";

fn r12(x: f64) -> f64 {
    fmt_num(x).parse().expect("formatted number parses")
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(io_at(path))?))
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    toml::from_str(&text).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.message())))
}

fn to_toml<T: Serialize>(value: &T) -> String {
    toml::to_string(value).expect("report serializes")
}

fn require_stage(out: &Path, stage: &str, files: &[&str]) -> CliResult<PathBuf> {
    let dir = out.join(stage);
    for f in files {
        let p = dir.join(f);
        if !p.is_file() {
            return Err(CliError::Io(format!(
                "missing output of stage `{stage}` ({}); run `speckit {stage}` first",
                p.display()
            )));
        }
    }
    Ok(dir)
}

fn spectrum_writer(s: &Spectrum) -> impl FnOnce(&mut std::io::BufWriter<File>) -> CliResult<()> + '_ {
    move |w| Ok(write_spectrum(w, s)?)
}

pub fn simulate(config: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    let target = config.target_grid()?;
    let source = config.source_grid()?;
    let p = config.original()?;
    // The data always come from the unperturbed instrument.
    let truth = SpreadFunctionModel::unperturbed(config.kernel.q)?;
    let op = discretize_operator(&target, &source, &truth)?;
    let y = synth_spectrum(&p.lines.lines, &source);
    let f = forward_apply(&op, &y)?;
    let measured = add_noise(&f, p.noise_sd, p.seed)?;

    let stage = StageDir::create(out, "simulate")?;
    stage.write(SIMULATE_FILES[0], spectrum_writer(&y))?;
    stage.write(SIMULATE_FILES[1], spectrum_writer(&f))?;
    stage.write(SIMULATE_FILES[2], spectrum_writer(&measured))?;
    for (name, lambda) in SIMULATE_FILES[3..].iter().zip(KERNEL_SECTIONS) {
        let values =
            source.nodes().map(|x| truth.kernel(lambda, x).map(|k| 10.0 * k)).collect::<speckit_core::Result<_>>()?;
        let section = Spectrum::new(source, values, SpectrumKind::Exact)?;
        stage.write(name, spectrum_writer(&section))?;
    }
    stage.commit()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub members: usize,
    pub norm_a: f64,
    pub mu_min: f64,
    pub eta_rule: String,
    pub eta: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub xi_min: f64,
    pub xi_max: f64,
}

pub fn train(config: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    let spec = config.training_spec()?;
    let ensemble = run_ensemble(&spec)?;
    let eta = ensemble.eta(spec.eta_rule);
    let (delta_min, delta_max) = ensemble.delta_range();
    let (xi_min, xi_max) = ensemble.xi_range();
    let summary = TrainingSummary {
        members: ensemble.members.len(),
        norm_a: r12(ensemble.norm_a),
        mu_min: r12(min_singular_of_b(&ensemble.base)),
        eta_rule: config.training.eta_rule.clone(),
        eta: r12(eta),
        delta_min: r12(delta_min),
        delta_max: r12(delta_max),
        xi_min: r12(xi_min),
        xi_max: r12(xi_max),
    };

    let mut curves = ensemble.curves();
    let mut upper = ensemble.upper.clone();
    upper.meta.id = UPPER_ID.into();
    let mut lower = ensemble.lower.clone();
    lower.meta.id = LOWER_ID.into();
    curves.push(upper.clone());
    curves.push(lower);

    let alphas: Vec<f64> = spec.alpha_grid.alphas().collect();
    let values = spec
        .g_grid
        .iter()
        .map(|&g| {
            let p = EnvelopeParams::new(summary.norm_a, summary.eta, g)?;
            Ok(alphas.iter().map(|&a| p.value(a)).collect())
        })
        .collect::<speckit_core::Result<Vec<Vec<f64>>>>()?;
    let family = EnvelopeFamily { grid: spec.alpha_grid.clone(), g_values: spec.g_grid.clone(), values };

    let stage = StageDir::create(out, "train")?;
    stage.write(TRAIN_FILES[0], |w| Ok(write_curves(w, &curves)?))?;
    stage.write(TRAIN_FILES[1], |w| Ok(write_envelope_table(w, &upper, &family)?))?;
    stage.write_text(TRAIN_FILES[2], &to_toml(&summary))?;
    stage.commit()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub mode: String,
    pub g: f64,
    pub alpha_g: f64,
    pub log10_alpha_g: f64,
    /// Envelope value at `alpha_g`.
    pub predicted_error: f64,
    /// The bound with the smallest eigenvalue in place of `g`.
    pub classical_bound: f64,
    pub eta: f64,
    pub norm_a: f64,
    pub members: usize,
    pub iterations: usize,
    pub converged: bool,
}

fn fit_report(r: &SelectionReport, classical: f64) -> FitReport {
    FitReport {
        mode: r.mode.as_str().into(),
        g: r12(r.g),
        alpha_g: r12(r.alpha_g),
        log10_alpha_g: r12(r.alpha_g.log10()),
        predicted_error: r12(r.predicted_error),
        classical_bound: r12(classical),
        eta: r.eta_used,
        norm_a: r.norm_a,
        members: r.curve_bundle.len(),
        iterations: r.iterations,
        converged: r.converged,
    }
}

pub fn fit(config: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    let spec = config.training_spec()?;
    let mode = config.mode()?;
    let dir = require_stage(out, "train", &TRAIN_FILES)?;
    let summary: TrainingSummary = read_toml(&dir.join("training.toml"))?;
    let curves: Vec<ErrorCurve> = read_curves(open(&dir.join("curves.csv"))?)?
        .into_iter()
        .filter(|c| c.meta.id != UPPER_ID && c.meta.id != LOWER_ID)
        .collect();
    let report = fit_curves(curves, summary.norm_a, summary.eta, &spec, mode)?;
    let budget = ErrorBudget::new(summary.eta, 0.0)?;
    let classical = classical_bound(report.alpha_g, summary.norm_a, &budget, summary.mu_min)?;
    if !report.converged {
        eprintln!("warning: contact iteration stopped after {} iterations without converging", report.iterations);
    }

    let stage = StageDir::create(out, "fit")?;
    stage.write_text("report.toml", &to_toml(&fit_report(&report, classical)))?;
    if !report.trace.is_empty() {
        stage.write("trace.csv", |w| {
            writeln!(w, "iteration, alpha, g")?;
            for (i, (a, g)) in report.trace.iter().enumerate() {
                writeln!(w, "{i}, {}, {}", fmt_num(*a), fmt_num(*g))?;
            }
            Ok(())
        })?;
    }
    stage.commit()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestoreSummary {
    pub alpha_g: f64,
    pub log10_alpha_g: f64,
    pub predicted_error: f64,
    pub residual_norm: f64,
    pub restored_maxima: usize,
    pub measured_maxima: usize,
    /// Present only when an exact spectrum is supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_rel: Option<f64>,
}

fn resolve(out: &Path, p: &str) -> PathBuf {
    let path = PathBuf::from(p);
    if path.is_absolute() {
        path
    } else {
        out.join(path)
    }
}

pub fn restore(config: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    let target = config.target_grid()?;
    let source = config.source_grid()?;
    let fit_dir = require_stage(out, "fit", &["report.toml"])?;
    let report: FitReport = read_toml(&fit_dir.join("report.toml"))?;
    let measured_path = config
        .io
        .measured
        .as_deref()
        .map(|p| resolve(out, p))
        .ok_or_else(|| CliError::Config("no measured spectrum: set [io] measured".into()))?;
    let measured = read_spectrum(open(&measured_path)?, SpectrumKind::Measured)
        .map_err(|e| CliError::Io(format!("{}: {e}", measured_path.display())))?;
    if !measured.grid().matches(&target) {
        return Err(CliError::Config(format!(
            "measured spectrum grid {} does not match the configured target grid {}",
            measured.grid(),
            target
        )));
    }
    let op = discretize_operator(&target, &source, &config.assumed_model()?)?;
    let solution = solve_tikhonov(&op, &measured, report.alpha_g)?;
    let y = &solution.spectrum;

    let sigma_rel = match config.io.exact.as_deref() {
        None => None,
        Some(p) => {
            let path = resolve(out, p);
            let exact = read_spectrum(open(&path)?, SpectrumKind::Exact)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            if !exact.grid().matches(&source) {
                return Err(CliError::Config(format!(
                    "exact spectrum grid {} does not match the configured source grid {}",
                    exact.grid(),
                    source
                )));
            }
            Some(r12(relative_error(y, &exact)?))
        }
    };
    let summary = RestoreSummary {
        alpha_g: report.alpha_g,
        log10_alpha_g: report.log10_alpha_g,
        predicted_error: report.predicted_error,
        residual_norm: r12(solution.residual_norm),
        restored_maxima: count_local_maxima(y.values(), 0.1),
        measured_maxima: count_local_maxima(measured.values(), 0.1),
        sigma_rel,
    };

    let stage = StageDir::create(out, "restore")?;
    stage.write(RESTORE_FILES[0], spectrum_writer(y))?;
    stage.write_text(RESTORE_FILES[1], &to_toml(&summary))?;
    stage.commit()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestStage {
    pub name: String,
    pub files: Vec<ManifestFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSeeds {
    pub training: Vec<u64>,
    pub original: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// Effective configuration; re-running every stage with it reproduces the files.
    pub config: String,
    pub config_sha256: String,
    pub mode: String,
    pub seeds: ManifestSeeds,
    pub stages: Vec<ManifestStage>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn stage_files(dir: &Path) -> CliResult<Vec<String>> {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_at(dir))? {
        let entry = entry.map_err(io_at(dir))?;
        if entry.file_type().map_err(io_at(dir))?.is_file() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

pub fn report(config: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    let stages: [(&str, &[&str]); 4] = [
        ("simulate", &SIMULATE_FILES),
        ("train", &TRAIN_FILES),
        ("fit", &["report.toml"]),
        ("restore", &RESTORE_FILES),
    ];
    for (name, files) in stages {
        require_stage(out, name, files)?;
    }

    let stage = StageDir::create(out, "report")?;
    let mut listed = Vec::new();
    for (name, _) in stages {
        let dir = out.join(name);
        let mut files = Vec::new();
        for f in stage_files(&dir)? {
            let src = dir.join(&f);
            let bytes = std::fs::read(&src).map_err(io_at(&src))?;
            let rel = format!("{name}/{f}");
            stage.write(&rel, |w| w.write_all(&bytes).map_err(CliError::from))?;
            files.push(ManifestFile { path: rel, sha256: sha256_hex(&bytes) });
        }
        listed.push(ManifestStage { name: name.into(), files });
    }
    let config_text = config.to_toml();
    stage.write_text("config.toml", &config_text)?;
    let manifest = Manifest {
        tool: "speckit".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: "config.toml".into(),
        config_sha256: sha256_hex(config_text.as_bytes()),
        mode: config.fit.mode.clone(),
        seeds: ManifestSeeds { training: config.seeds.training.clone(), original: config.seeds.original },
        stages: listed,
    };
    stage.write_text("manifest.toml", &to_toml(&manifest))?;
    stage.commit()
}
