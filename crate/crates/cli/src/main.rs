//! `axo`: characterize approximate operators, learn a cross-width
//! configuration supersampler and run the seeded design-space search.
//!
//! ```bash
//! axo characterize --op adder:u4 --exhaustive -o l.csv
//! axo characterize --op adder:u8 --exhaustive -o h.csv
//! axo match --low l.csv --high h.csv -o matched/
//! axo train classifier --training matched/training.csv -o conss.axf
//! axo supersample --model conss.axf --low l.csv --train h.csv --factor 0.2 -o pool.csv
//! axo dse --train h.csv --factor 0.2 --init pool.csv -o dse-conss/
//! axo report --low l.csv --train h.csv --model conss.axf -o report/
//! ```
//!
//! Exit codes: 0 success, 1 other failure, 2 usage or invalid parameter,
//! 3 schema/parse/version/checksum/width mismatch, 4 capacity, 5 I/O.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] axo::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("{} already exists (pass --force to overwrite)", .0.display())]
    Exists(PathBuf),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use axo::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Schema(_)
                | E::Parse { .. }
                | E::Version { .. }
                | E::Checksum(_)
                | E::WidthMismatch { .. }
                | E::ConfigLength { .. }
                | E::DuplicateConfig(_) => 3,
                E::Capacity(_) => 4,
                E::Io { .. } => 5,
                E::InvalidParam(_) | E::InvalidOperator(_) | E::OperandOutOfRange { .. } | E::ConfigRange { .. } => 2,
                E::Empty(_) => 1,
            },
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Exists(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "axo", version, about = "Approximate operator characterization and supersampled design-space search")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Run-config file (TOML); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed recorded in every output.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (outputs do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Characterize operator configurations into a dataset CSV.
    Characterize(commands::CharacterizeArgs),
    /// Scaled points, k-means clusters, windowed trends and distance histograms.
    Analyze(commands::AnalyzeArgs),
    /// Pair every high-width design with its nearest low-width design.
    Match(commands::MatchArgs),
    /// Train the supersampling classifier or a metric regressor.
    #[command(subcommand)]
    Train(commands::TrainCommand),
    /// Predict a high-width candidate pool from constrained low-width seeds.
    Supersample(commands::SupersampleArgs),
    /// Constrained genetic search, optionally seeded with a pool.
    Dse(commands::DseArgs),
    /// Four-way hypervolume comparison across scaling factors.
    Report(commands::ReportArgs),
}

/// Settings shared by every subcommand after merging flags and config.
pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub force: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.global.threads.or(config.threads) {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let ctx = Context { seed: cli.global.seed.or(config.seed).unwrap_or(0), force: cli.global.force, config };
    match cli.command {
        Command::Characterize(a) => commands::characterize(&ctx, a),
        Command::Analyze(a) => commands::analyze(&ctx, a),
        Command::Match(a) => commands::match_cmd(&ctx, a),
        Command::Train(a) => commands::train(&ctx, a),
        Command::Supersample(a) => commands::supersample(&ctx, a),
        Command::Dse(a) => commands::dse(&ctx, a),
        Command::Report(a) => commands::report(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
