//! Stage-wise pipeline: `simulate`, `train`, `fit`, `restore` and `report`.
//!
//! Each stage reads its inputs from the output directory of earlier stages
//! and writes one subdirectory of plain-text tables.

pub mod commands;
pub mod config;
pub mod error;
mod stage;

use std::path::PathBuf;

use speckit_core::training::FitMode;

pub use config::RunConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Simulate,
    Train,
    Fit,
    Restore,
    Report,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Simulate => "simulate",
            Stage::Train => "train",
            Stage::Fit => "fit",
            Stage::Restore => "restore",
            Stage::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub mode: Option<FitMode>,
}

/// Loads the configuration with command-line overrides applied.
pub fn effective_config(opts: &Options) -> CliResult<RunConfig> {
    let path = opts.config.as_deref().ok_or_else(|| CliError::Config("no config file given (--config <path>)".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = opts.seed {
        config.override_seed(seed);
    }
    if let Some(mode) = opts.mode {
        config.fit.mode = mode.as_str().to_string();
    }
    Ok(config)
}

/// Runs one stage and returns the directory it wrote.
pub fn run(stage: Stage, opts: &Options) -> CliResult<PathBuf> {
    let config = effective_config(opts)?;
    let out = config.out_dir(opts.out.as_deref());
    match stage {
        Stage::Simulate => commands::simulate(&config, &out),
        Stage::Train => commands::train(&config, &out),
        Stage::Fit => commands::fit(&config, &out),
        Stage::Restore => commands::restore(&config, &out),
        Stage::Report => commands::report(&config, &out),
    }
}

/// Sizes the worker pool from `SPECKIT_THREADS` (unset or 0 means automatic).
pub fn init_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("SPECKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("SPECKIT_THREADS must be a non-negative integer, got {value:?}")))?;
    if n > 0 {
        // A pool already built by an earlier call is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
