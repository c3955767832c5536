//! `shapecode`: train shape codebooks, compress binary images, and produce
//! the analysis reports as CSV.

mod commands;
mod config;
mod report;

use std::io;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{
    AnalyzeArgs, ConvergeArgs, DecodeArgs, EncodeArgs, MnistTableArgs, SimulateArgs, SweepArgs, TrainArgs,
};

#[derive(Debug, Parser)]
#[command(name = "shapecode", version, about, args_override_self = true)]
struct Cli {
    /// Flat `key = value` file supplying defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mine a shape codebook from a corpus.
    Train(TrainArgs),
    /// Compress a PBM image.
    Encode(EncodeArgs),
    /// Restore a PBM image from a container.
    Decode(DecodeArgs),
    /// Entropy-rate and shape statistics of a corpus.
    Analyze(AnalyzeArgs),
    /// Write a birth-death image corpus as PBM files.
    Simulate(SimulateArgs),
    /// Per-class MNIST statistics.
    MnistTable(MnistTableArgs),
    /// Fixed-size shape sweep over the simulated presets.
    Sweep(SweepArgs),
    /// Shape count and rate against image size.
    Converge(ConvergeArgs),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] shapecode::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Io { .. } => "io",
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
        }
    }
}

macro_rules! core_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        }
    )*};
}

core_from!(
    shapecode::codebook::CodebookError,
    shapecode::codec::CodecError,
    shapecode::entropy::EntropyError,
    shapecode::image::ImageError,
    shapecode::simulate::SimulateError
);

fn run() -> Result<(), CliError> {
    let args = config::expand(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let first = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("bad arguments")
                .trim_start_matches("error: ");
            return Err(CliError::Usage(first.to_string()));
        }
    };
    debug_assert!(cli.config.is_none(), "config is consumed by expand");
    match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::Encode(a) => commands::encode(&a),
        Command::Decode(a) => commands::decode(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::MnistTable(a) => commands::mnist_table(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Converge(a) => commands::converge(&a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.category());
            ExitCode::from(match e {
                CliError::Usage(_) | CliError::Config(_) => 2,
                _ => 1,
            })
        }
    }
}
