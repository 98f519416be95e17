//! Command-line front end: configuration, file formats and the subcommands.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration or input,
//! 3 malformed input file, 4 disconnected comparison graph, 5 fit did not
//! converge.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use config::{Cli, Command, RunConfig};
pub use error::{exit, CliError, CliResult};

/// Resolves the configuration and runs the command, returning the files written.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let config = RunConfig::resolve(&cli.command)?;
    commands::execute(&config)
}

/// Parses `args` (including the program name), runs, reports and returns the
/// exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            exit::OK
        }
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
