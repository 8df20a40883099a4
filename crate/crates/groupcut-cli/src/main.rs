use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use groupcut_cli::commands::{self, Method};
use groupcut_cli::document::FunctionDocument;
use groupcut_cli::CliError;
use serde::Serialize;

/// Minimality and extremality tests for two-row cut-generating functions.
#[derive(Parser)]
#[command(name = "groupcut", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check minimality.
    Minimality { file: PathBuf },
    /// Decide extremality.
    Extremality {
        file: PathBuf,
        /// Refinement factor of the finite test grid (at least 3).
        #[arg(long, default_value_t = 3)]
        m: u32,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// List the additive faces of a pwl2 function.
    Faces { file: PathBuf },
    /// Write CSV dumps and SVG heatmaps of values and tight-pair counts.
    Plot {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Refinement factor for piecewise linear functions.
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
}

fn read(path: &Path) -> Result<FunctionDocument, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    FunctionDocument::parse(&text)
}

/// Writes JSON to stdout; a closed pipe is not an error.
fn print<T: Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("documents serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("GROUPCUT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Input(format!("GROUPCUT_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Minimality { file } => print(&commands::minimality(&read(&file)?)?),
        Command::Extremality { file, m, method } => print(&commands::extremality(&read(&file)?, m, method)?),
        Command::Faces { file } => print(&commands::faces(&read(&file)?)?),
        Command::Plot { file, out, m } => {
            let written = groupcut_cli::plot::plot(&read(&file)?, m, &out)?;
            print(&written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("groupcut: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
