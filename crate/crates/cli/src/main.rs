//! `driftlab` command-line entry point.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 numerical precondition
//! violated, 3 a checked property failed (bound violated, identifiability
//! probe failed).

mod args;
mod commands;
mod plot;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Violation;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Violation>().is_some() {
        return 3;
    }
    if let Some(e) = err.downcast_ref::<driftlab::Error>() {
        if e.is_precondition() || matches!(e, driftlab::Error::NonFinite(_)) {
            return 2;
        }
    }
    1
}

fn init_workers() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("DRIFTLAB_WORKERS") {
        let n: usize = v.trim().parse().map_err(|_| {
            anyhow::anyhow!("DRIFTLAB_WORKERS must be a positive integer, got `{v}`")
        })?;
        if n == 0 {
            anyhow::bail!("DRIFTLAB_WORKERS must be a positive integer, got `{v}`");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = init_workers().and_then(|()| match cli.command {
        Command::Surrogate(a) => commands::surrogate(&a),
        Command::Cobweb(a) => commands::cobweb(&a),
        Command::Bounds(a) => commands::bounds(&a),
        Command::Identifiability(a) => commands::identifiability(&a),
        Command::Toy(a) => commands::toy(&a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(c) = e.downcast_ref::<clap::Error>() {
                let _ = c.print();
                return ExitCode::from(1);
            }
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
