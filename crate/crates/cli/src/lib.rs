//! Command-line front end: argument parsing, dispatch and CSV/JSON writers.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

pub use args::{Cli, Command};
pub use error::CliError;

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Sweep(a) => commands::sweep_cmd(a),
        Command::Moment(a) => commands::moment(a),
        Command::Compare(a) => commands::compare(a),
        Command::Selftest(a) => commands::selftest(a),
    }
}
