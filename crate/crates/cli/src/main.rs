//! `htype`: build, validate and analyse general H-type algebras from the command line.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Exit statuses.
pub(crate) mod status {
    pub const OK: u8 = 0;
    pub const FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
}

#[derive(Debug)]
pub(crate) enum CliError {
    /// Bad input: flags, files or JSON.
    Usage(String),
    /// A verdict that the input does not have the requested property.
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => status::USAGE,
            CliError::Failed(_) => status::FAILED,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(status::USAGE);
        }
    }
    let result = match &cli.command {
        Command::Catalog(a) => commands::catalog(a),
        Command::Validate(a) => commands::validate(a),
        Command::Geodesic(a) => commands::geodesic(a),
        Command::Curvature(a) => commands::curvature(a),
        Command::ComposeSearch(a) => commands::compose_search(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            match &e {
                CliError::Usage(msg) | CliError::Failed(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(e.code())
        }
    }
}
