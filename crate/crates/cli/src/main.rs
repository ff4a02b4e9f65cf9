use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use netinf_cli::{run_from_text, Experiment, Overrides, RunError};

/// Reproducible converse-bound and network recovery experiments.
#[derive(Parser)]
#[command(name = "netinf", version)]
struct Cli {
    experiment: Experiment,
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: reading {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out,
        threads: cli.threads,
    };
    match run_from_text(cli.experiment, &text, &overrides) {
        Ok(outputs) => {
            for f in &outputs.files {
                println!("{}", outputs.dir.join(&f.file).display());
            }
            println!("{}", outputs.manifest.display());
            ExitCode::SUCCESS
        }
        Err(RunError::Config(errors)) => {
            eprintln!("error: invalid config {}", cli.config.display());
            eprintln!("{}", serde_json::to_string(&errors).expect("plain JSON"));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
