use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ceeat::config::{validate_config, ExperimentKind, Overrides};
use ceeat::{run_experiment, CliError};

/// Collective emission, absorption and transfer experiments.
#[derive(Debug, Parser)]
#[command(name = "ceeat", version)]
struct Cli {
    experiment: ExperimentKind,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (default: config `output_dir`, then $CEEAT_OUT_DIR, then ./ceeat-out).
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&cli.config).map_err(|source| CliError::Io {
        path: cli.config.display().to_string(),
        source,
    })?;
    let overrides = Overrides {
        seed: cli.seed,
        workers: cli.workers,
        output_dir: cli.out,
    };
    let config = validate_config(&text, cli.experiment, &overrides)?;
    log::info!(
        "running {} into {} with {} workers",
        config.experiment,
        config.output_dir.display(),
        config.workers
    );
    let manifest = run_experiment(&config)?;
    for (name, sum) in &manifest.files {
        println!("{sum}  {}", config.output_dir.join(name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
