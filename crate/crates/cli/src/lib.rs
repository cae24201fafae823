//! Library half of the `condroc` command-line tool.

pub mod cli;
pub mod commands;
pub mod dataset;
pub mod error;
pub mod output;
pub mod synth;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::error::{CliError, CliResult};

pub fn run(cli: &Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Estimate(args) => commands::estimate(args),
        Command::Test(args) => commands::test(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Synth(args) => commands::synth(args),
    }
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { error::exit::USAGE } else { error::exit::OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => error::exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
