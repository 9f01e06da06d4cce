//! Command line front end for the tracking simulator.
//!
//! ```text
//! track run CONFIG [--out DIR] [--seed N] [--trials N] [--threads N]
//! track defaults
//! ```
//!
//! `TRACK_OUT_DIR` overrides the output directory of the config file;
//! `--out` overrides both.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use its_track::config::{parse_config, ExperimentSpec};
use its_track::experiment::run_experiment;
use its_track::TrackError;

#[derive(Parser)]
#[command(name = "track", version, about = "MAP channel tracking Monte Carlo runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments of a configuration file and write CSV tables.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo trials per SNR point.
        #[arg(long)]
        trials: Option<usize>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the fully resolved default configuration.
    Defaults,
}

fn run(
    config: PathBuf,
    out: Option<PathBuf>,
    seed: Option<u64>,
    trials: Option<usize>,
    threads: Option<usize>,
) -> Result<(), TrackError> {
    let mut spec = parse_config(&config)?;
    if let Some(dir) = std::env::var_os("TRACK_OUT_DIR") {
        spec.output_dir = dir.into();
    }
    if let Some(dir) = out {
        spec.output_dir = dir;
    }
    if let Some(seed) = seed {
        spec.sim.seed = seed;
    }
    if let Some(trials) = trials {
        spec.sim.num_trials = trials;
    }
    spec.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| TrackError::InvalidParameter {
            field: "threads".into(),
            reason: e.to_string(),
        })?;
    let written = pool.install(|| run_experiment(&spec))?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            trials,
            threads,
        } => run(config, out, seed, trials, threads),
        Command::Defaults => {
            print!("{}", ExperimentSpec::default().to_toml());
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
