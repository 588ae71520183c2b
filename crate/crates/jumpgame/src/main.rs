use clap::Parser;
use jumpgame::cli::{run, Cli};
use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()) as u8)
}
