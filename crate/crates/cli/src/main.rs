mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::Cli;
use error::CliError;
use output::Header;

/// Worker count for the parallel parts; defaults to all cores.
const THREADS_ENV: &str = "LANDAU_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = text.trim().parse().map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{text}'")))?;
    if n == 0 {
        return Err(CliError::Config(format!("{THREADS_ENV} must be positive")));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let started = Instant::now();
    let outcome = commands::run(&cli.command, cli.common.preset, cli.common.out.as_deref())?;
    let header = Header {
        command: cli.command.name().to_string(),
        config: serde_json::json!({
            "preset": cli.common.preset,
            "format": cli.common.format,
            "args": cli.command,
        }),
    };
    output::write(cli.common.out.as_deref(), cli.common.format, &header, &outcome.artifact, started.elapsed().as_secs_f64())?;
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("landau: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
