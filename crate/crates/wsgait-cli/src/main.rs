use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wsgait_cli::{
    cmd_analyze, cmd_attack, cmd_evaluate, cmd_ingest, cmd_report, cmd_synth, CommandStatus,
    ExperimentConfig,
};

/// Gait-authentication experiments: synthetic datasets, the
/// classifier-by-sensor evaluation grid, and the treadmill spoofing attack.
#[derive(Parser)]
#[command(name = "wsgait", version, about)]
struct Cli {
    /// Experiment config (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (0 = all cores). Results are identical at any setting.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Materialize the synthetic dataset (subjects + calibration sweep).
    Synth,
    /// Validate and import external recording CSVs into the dataset.
    Ingest {
        /// Recording CSV files.
        files: Vec<PathBuf>,
    },
    /// Run the zero-effort / imitator evaluation grid.
    Evaluate,
    /// Run the treadmill spoofing attack against every subject.
    Attack,
    /// Bhattacharyya overlap and learning-curve reports.
    Analyze,
    /// Assemble stage outputs into one report.
    Report,
}

fn run(cli: Cli) -> anyhow::Result<CommandStatus> {
    if cli.jobs > 0 {
        // ignore the error when a pool is already installed
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;

    match &cli.command {
        Command::Synth => {
            cmd_synth(&config, &cli.out, cli.force)?;
            Ok(CommandStatus::Success)
        }
        Command::Ingest { files } => {
            cmd_ingest(&config, &cli.out, files)?;
            Ok(CommandStatus::Success)
        }
        Command::Evaluate => cmd_evaluate(&config, &cli.out),
        Command::Attack => cmd_attack(&config, &cli.out),
        Command::Analyze => {
            cmd_analyze(&config, &cli.out)?;
            Ok(CommandStatus::Success)
        }
        Command::Report => {
            cmd_report(&config, &cli.out)?;
            Ok(CommandStatus::Success)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(CommandStatus::Success) => ExitCode::SUCCESS,
        Ok(CommandStatus::Partial) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
