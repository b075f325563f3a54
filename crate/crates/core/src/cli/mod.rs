//! Command-line entry points.
//!
//! Exit codes: 0 success, 2 usage error, 3 invalid input, 4 runtime failure.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_analyze, cmd_batch, cmd_calibrate, cmd_run, cmd_synth, BatchOutcome, RunManifest,
    RunSource, SynthKind,
};

use crate::model::FactorCondition;

#[derive(Debug, Parser)]
#[command(name = "telekinesis", version, about = "Telekinesis interaction engine: calibrate, run, batch and analyze")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Engine configuration JSON (defaults apply to missing fields).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive blink threshold and EMG extrema from a >= 60 s resting trace.
    Calibrate {
        #[command(flatten)]
        config: ConfigArg,
        /// Resting trace (JSONL). Mutually exclusive with --seed.
        #[arg(long, conflicts_with = "seed", required_unless_present = "seed")]
        trace: Option<PathBuf>,
        /// Synthesize a 90 s resting trace from this seed instead.
        #[arg(long)]
        seed: Option<u64>,
        /// Output calibration JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one condition over a recorded trace or a synthesized operator.
    Run {
        #[command(flatten)]
        config: ConfigArg,
        /// Factor condition, e.g. `c=yes,s=no,e=yes`.
        #[arg(long, default_value = "c=no,s=no,e=no")]
        condition: FactorCondition,
        /// Input trace (JSONL). Mutually exclusive with --seed.
        #[arg(long, conflicts_with = "seed", required_unless_present = "seed")]
        trace: Option<PathBuf>,
        /// Synthesize the operator trace from this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Calibration JSON; required when concentration or strain is enabled.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Output directory for snapshots.jsonl, report.json (and trace.jsonl when synthesized).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run all eight conditions in a seeded random order.
    Batch {
        #[command(flatten)]
        config: ConfigArg,
        /// Master seed: fixes the order and every per-condition seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aligned-rank-transform ANOVA over a long-format CSV.
    Analyze {
        /// CSV with header participant,concentration,strain,energy,response.
        csv: PathBuf,
        /// Output JSON (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic trace.
    Synth {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_enum, default_value = "task")]
        kind: SynthKind,
        #[arg(long, default_value = "c=no,s=no,e=no")]
        condition: FactorCondition,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Calibration used by the operator model (synthesized from the seed when omitted).
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve live sessions over a websocket at /session.
    #[cfg(feature = "serve")]
    Serve {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory holding the browser UI bundle.
        #[arg(long, default_value = "ui")]
        static_dir: PathBuf,
        /// Record each session's synthesized frames under this directory.
        #[arg(long)]
        record_dir: Option<PathBuf>,
    },
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
