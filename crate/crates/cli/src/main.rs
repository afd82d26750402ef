use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kamscope::Exec;

mod args;
mod commands;
mod error;
mod output;
mod source;
mod svg;

use args::Cli;
use error::{CliError, CliResult};
use output::{Manifest, OutDir};

const OUT_ENV: &str = "KAMSCOPE_OUT";

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let (command, threads) = match (&cli.from_manifest, cli.command) {
        (Some(_), Some(_)) => return Err(CliError::Validation("--from-manifest replaces the subcommand; pass one or the other".into())),
        (Some(path), None) => {
            let m = Manifest::load(path)?;
            (m.command, cli.threads.or(m.threads))
        }
        (None, Some(c)) => (c, cli.threads),
        (None, None) => return Err(CliError::Validation("no command given; see kamscope --help".into())),
    };
    let exec = match threads {
        Some(0) => return Err(CliError::Validation("--threads must be at least 1".into())),
        Some(1) => Exec::Sequential,
        Some(n) => {
            // a second call in the same process is harmless; the first pool wins
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Exec::Parallel
        }
        None => Exec::Parallel,
    };
    let dir = cli
        .out
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("kamscope-out"));
    let mut out = OutDir::create(dir)?;
    let outcome = commands::run(&command, &mut out, exec)?;
    let dir = out.path().to_path_buf();
    out.finish(command, threads, outcome.resolved)?;
    eprintln!("artifacts in {}", dir.display());
    outcome.quality.map_err(CliError::Numeric)
}
