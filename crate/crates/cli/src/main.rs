use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use thetanull_cli::{run, Cli, TOL_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_tol = std::env::var(TOL_ENV).ok();
    let outcome = run(&cli, env_tol.as_deref());
    // A closed pipe is not worth a panic.
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.code as u8)
}
