mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::Context;
use crate::error::{CliError, EXIT_USAGE};

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    match jobs {
        Some(0) => return Err(CliError::usage("--jobs must be at least 1")),
        Some(n) => builder = builder.num_threads(n),
        None => {}
    }
    builder.build().map_err(|e| CliError::usage(format!("cannot start {jobs:?} worker threads: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Context::new(cli.quiet, cli.record_wall_time);
    let result = thread_pool(cli.jobs).and_then(|pool| pool.install(|| commands::run(&cli.command, &ctx)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cvboost {}: error: {e}", cli.command.name());
            let code = u8::try_from(e.exit_code()).unwrap_or(EXIT_USAGE as u8);
            ExitCode::from(code)
        }
    }
}
