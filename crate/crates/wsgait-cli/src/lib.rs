//! Library surface of the CLI so integration tests can drive commands
//! without spawning processes.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_analyze, cmd_attack, cmd_evaluate, cmd_ingest, cmd_report, cmd_synth, CommandStatus,
    OutputLayout,
};
pub use config::ExperimentConfig;
