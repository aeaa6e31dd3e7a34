//! The `inr-opt` command line: argument parsing, Matrix Market I/O and report formatting
//! around the solvers in `inr_opt_core`.

pub mod args;
mod commands;
pub mod error;
pub mod mtx;
pub mod output;

use args::{Cli, Command, Format};
use error::CliResult;
use output::Report;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "INR_OPT_THREADS";

pub fn execute(cli: &Cli) -> CliResult<Report> {
    commands::run(&cli.command)
}

pub fn default_format(command: &Command) -> Format {
    match command {
        Command::Fov(_) => Format::Csv,
        _ => Format::Json,
    }
}

/// Runs the command and writes its report; returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let format = cli.format.unwrap_or_else(|| default_format(&cli.command));
    let result = execute(cli).and_then(|report| {
        report.emit(format, cli.out.as_deref())?;
        Ok(report.exit_code())
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Applies `INR_OPT_THREADS` to the rayon pool and the dense kernels.
pub fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())?;
    faer::set_global_parallelism(faer::Par::rayon(n));
    Ok(())
}
