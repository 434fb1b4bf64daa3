use std::process::ExitCode;

use clap::Parser;
use lambda_forge::cli::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
