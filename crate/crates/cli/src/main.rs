use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use opalg_cli::config::{ExperimentConfig, ExperimentKind, OutputFormat};
use opalg_cli::report::to_csv;
use opalg_cli::run::{prepare, run_to_json};

/// Operator-algebra experiments: separation verdicts, CHSH maximization,
/// separability certificates, and representation-level cross-checks.
#[derive(Debug, Parser)]
#[command(name = "opalg", version)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: ExperimentKind,

    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,

    /// Overrides the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,

    /// Report path; stdout when omitted (falls back to the config's output
    /// section).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Report format (overrides the config's output section).
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let config = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out_path = cli.out.clone().or_else(|| {
        config
            .output
            .as_ref()
            .and_then(|o| o.path.as_ref())
            .map(PathBuf::from)
    });
    let format = cli
        .format
        .or_else(|| config.output.as_ref().map(|o| o.format))
        .unwrap_or(OutputFormat::Json);

    let prepared = match prepare(config, cli.experiment, cli.seed) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let (report, json) = match run_to_json(&prepared) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };

    let payload = match format {
        OutputFormat::Json => json,
        OutputFormat::Csv => to_csv(&report),
    };
    match out_path {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, payload) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{payload}"),
    }
    ExitCode::SUCCESS
}
