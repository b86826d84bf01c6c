//! `recon`: build matrices, run single reconciliations and Monte Carlo sweeps.
//!
//! Results go to stdout as JSON; logs and progress go to stderr. Set
//! `RECON_LOG` (e.g. `info`, `debug`) for more detail.
//!
//! Exit codes: 0 success, 2 decoding failed, 3 bad configuration or I/O,
//! 4 transport failure.

mod construct;
mod error;
mod matrices;
mod puncture;
mod reconcile;
mod sweep;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "recon", version, about = "Rate-compatible LDPC reconciliation for QKD")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build N PEG matrices of one rate and write them as alist files.
    Construct(construct::Args),
    /// Derive the punctured positions for a matrix set.
    Puncture(puncture::Args),
    /// Run one reconciliation session (locally or across two processes).
    Reconcile(reconcile::Args),
    /// Run a Monte Carlo sweep from a JSON config.
    Sweep(sweep::Args),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RECON_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Construct(a) => construct::run(a),
        Command::Puncture(a) => puncture::run(a),
        Command::Reconcile(a) => reconcile::run(a),
        Command::Sweep(a) => sweep::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("recon: {e}");
            e.exit_code()
        }
    }
}

/// Writes a JSON value to stdout followed by a newline.
fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    use std::io::Write as _;
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<stdout>")(e)),
        _ => Ok(()),
    }
}
