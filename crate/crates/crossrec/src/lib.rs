//! File formats, configuration and subcommands for the `crossrec` binary.
//!
//! The numerical work lives in `crossrec-core`; this crate reads and writes
//! JSON Lines inputs, the flat JSON config, the versioned model file and
//! the CSV/JSON reports.

pub mod cli;
pub mod commands;
pub mod config;
pub mod io;
pub mod modelfile;
pub mod report;

use std::io::Write;

use cli::{Cli, Command};
use commands::Outcome;
use config::RunConfig;

/// Process exit status for each kind of result.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const CELL_FAILURE: u8 = 1;
    pub const INPUT_ERROR: u8 = 2;
}

fn run_config(path: Option<&std::path::Path>, flags: serde_json::Map<String, serde_json::Value>) -> anyhow::Result<RunConfig> {
    let file = config::read_file_config(path)?;
    Ok(RunConfig::from_object(config::merge(file, flags))?)
}

/// Runs a parsed command line and returns the exit status.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Ingest(a) => run_config(a.data.config.as_deref(), cli::overrides(&a)).and_then(|c| commands::ingest(&c, out)),
        Command::Analyze(a) => run_config(a.data.config.as_deref(), cli::overrides(&a)).and_then(|c| commands::analyze(&c)),
        Command::Train(a) => run_config(a.data.config.as_deref(), cli::overrides(&a)).and_then(|c| commands::train(&c, out, err)),
        Command::Recommend(a) => run_config(a.data.config.as_deref(), cli::overrides(&a)).and_then(|c| commands::recommend(&c, out, err)),
        Command::Evaluate(a) => run_config(a.data.config.as_deref(), cli::overrides(&a)).and_then(|c| commands::evaluate(&c, err)),
        Command::Synth(a) => config::read_file_config(a.config.as_deref())
            .map_err(anyhow::Error::from)
            .and_then(|file| commands::synth(config::merge(file, cli::overrides(&a)))),
    };
    match result {
        Ok(Outcome::Success) => exit::SUCCESS,
        Ok(Outcome::Partial) => exit::CELL_FAILURE,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            exit::INPUT_ERROR
        }
    }
}
