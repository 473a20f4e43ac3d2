use std::process::ExitCode;

use clap::Parser;
use sphere_hardy_cli::{run, Cli};

fn main() -> ExitCode {
    run(&Cli::parse())
}
