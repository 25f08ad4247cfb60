//! `matseq`: simulate matrix time series, test and estimate their factor
//! structure, and run Monte Carlo benchmarks.
//!
//! Exit status: 0 when the command ran (whatever the verdict), 2 for invalid
//! arguments or data, 3 for I/O and parse failures, 4 for numerical failures.

mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use matseq::{Error, ErrorCategory, Result};

use args::{Cli, Command};
use commands::{execute, Manifest};

fn exit_code(err: &Error) -> u8 {
    match err.category() {
        ErrorCategory::Validation => 2,
        ErrorCategory::Io => 3,
        ErrorCategory::Numerical => 4,
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let command = match cli.command {
        Command::Rerun(args) => {
            let manifest = Manifest::load(&args.path)?;
            if matches!(manifest.command, Command::Rerun(_)) {
                return Err(Error::InvalidArgument(
                    "manifest records another rerun".to_string(),
                ));
            }
            log::info!("re-running {:?}", manifest.command);
            manifest.command
        }
        other => other,
    };
    let started = Instant::now();
    let output = execute(&command, cli.threads)?;
    let manifest = Manifest::new(command, cli.threads, started.elapsed());
    std::io::stdout()
        .write_all(&output.stdout)
        .and_then(|_| std::io::stderr().write_all(&output.stderr))
        .map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        })?;
    manifest.emit(cli.manifest.as_deref())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
