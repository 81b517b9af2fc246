//! Command-line front end: decode runs with reproducible manifests, Full /
//! Half / Prophet comparisons, convergence statistics and toy-model training.

pub mod compare;
pub mod dataset;
pub mod decode;
pub mod error;
pub mod flags;
pub mod ids;
pub mod manifest;
pub mod model;
pub mod stats;
pub mod toy;
pub mod train;

use clap::{Parser, Subcommand};

use crate::error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "prophet", version, about = "Early-commit decoding for masked diffusion language models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decode one prompt with or without early commit.
    Decode(decode::DecodeArgs),
    /// Run Full, Half and Prophet decoding over a dataset.
    Compare(compare::CompareArgs),
    /// Convergence histograms and dynamics matrices from recorded traces.
    Stats(stats::StatsArgs),
    /// Train an n-gram denoiser on a token-id corpus.
    TrainToy(train::TrainArgs),
    /// Generate the synthetic corpus and evaluation dataset.
    ToyData(toy::ToyArgs),
}

pub fn dispatch(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Decode(a) => decode::cmd_decode(a),
        Command::Compare(a) => compare::cmd_compare(a),
        Command::Stats(a) => stats::cmd_stats(a),
        Command::TrainToy(a) => train::cmd_train(a),
        Command::ToyData(a) => toy::cmd_toy(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Errors go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}
