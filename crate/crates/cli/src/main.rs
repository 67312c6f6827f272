use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use speckit_cli::{init_threads, run, Options, Stage};
use speckit_core::training::FitMode;

#[derive(Parser)]
#[command(name = "speckit", version, about = "Restore instrument-broadened spectra by Tikhonov regularization")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `[io] out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Replaces all seeds of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Fitting mode for the truncation level.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write exact, broadened and measured spectra and kernel cross-sections.
    Simulate,
    /// Run the training ensemble and write error curves and envelopes.
    Train,
    /// Fit the truncation level and select the regularization parameter.
    Fit,
    /// Restore the measured spectrum at the selected parameter.
    Restore,
    /// Collect all stage outputs with a manifest.
    Report,
}

#[derive(ValueEnum, Clone, Copy)]
enum Mode {
    Scan,
    Analytic,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stage = match cli.command {
        Command::Simulate => Stage::Simulate,
        Command::Train => Stage::Train,
        Command::Fit => Stage::Fit,
        Command::Restore => Stage::Restore,
        Command::Report => Stage::Report,
    };
    let opts = Options {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        mode: cli.mode.map(|m| match m {
            Mode::Scan => FitMode::Scan,
            Mode::Analytic => FitMode::Analytic,
        }),
    };
    let result = init_threads().and_then(|_| run(stage, &opts));
    match result {
        Ok(dir) => {
            println!("{}: wrote {}", stage.name(), dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("speckit {}: {e}", stage.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
