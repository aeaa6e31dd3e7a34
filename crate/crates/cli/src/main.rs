use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use inr_opt_cli::args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Err(msg) = inr_opt_cli::configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    ExitCode::from(inr_opt_cli::run(&cli))
}
