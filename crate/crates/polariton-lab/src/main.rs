use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use polariton_lab::config::parse_config;
use polariton_lab::linalg;
use polariton_lab::runner::run_subcommand;

/// Polariton toolkit: dressed-state spectra, effective coupling tables,
/// Stark-splitting models, and fluorescence spectra for a four-level atom
/// in a driven cavity.
#[derive(Parser)]
#[command(name = "polariton-lab", version, about)]
struct Cli {
    /// Subcommand: manifolds, couplings, stark, spectrum, validate, or figures
    subcommand: String,

    /// Path to an INI run configuration
    #[arg(long)]
    config: PathBuf,

    /// Output directory (overrides the configured one)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match linalg::apply_thread_cap_from_env() {
        Ok(Some(n)) => eprintln!("linear algebra thread cap: {n}"),
        Ok(None) => {}
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(1);
        }
    }
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let config = match parse_config(&text) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run_subcommand(&cli.subcommand, &config, cli.out.as_deref()) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
