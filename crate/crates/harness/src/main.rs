use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use grounded_harness::{replay, Command, ExperimentConfig, Harness};
use log::error;

#[derive(Parser)]
#[command(
    name = "grounded",
    version,
    about = "Ground LLM agent simulations in reference opinion dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the reference model and write trajectories.
    SimulateReference(Common),
    /// Score candidate agents against the reference model over the grid.
    RunConsistency(Common),
    /// Encode and decode every scale value through the backend.
    RunCodec(Common),
    /// Compare consistency across prompt variants on shared seeds.
    RunSensitivity(Common),
    /// Measure reactions to posts under each framing pair.
    RunNegativity(Common),
    /// Re-run a recorded experiment from its audit log.
    Replay {
        /// Audit log written by an earlier run.
        audit: PathBuf,
        /// Output directory for the replayed reports.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the effective configuration as TOML.
    ShowConfig(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set run.epochs=5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Runs per grid cell.
    #[arg(long)]
    runs: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path, &self.overrides)?,
            None => ExperimentConfig::from_toml_with("", &self.overrides)?,
        };
        cfg.apply_env();
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.run.master_seed = seed;
        }
        if let Some(runs) = self.runs {
            cfg.run.runs = runs;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (command, common) = match cli.command {
        Cmd::Replay { audit, out } => {
            let (command, ok) = replay(&audit, &out)?;
            println!("replayed {} into {}", command.as_str(), out.display());
            return Ok(ok);
        }
        Cmd::ShowConfig(c) => {
            print!("{}", c.config()?.to_toml());
            return Ok(true);
        }
        Cmd::SimulateReference(c) => (Command::SimulateReference, c),
        Cmd::RunConsistency(c) => (Command::RunConsistency, c),
        Cmd::RunCodec(c) => (Command::RunCodec, c),
        Cmd::RunSensitivity(c) => (Command::RunSensitivity, c),
        Cmd::RunNegativity(c) => (Command::RunNegativity, c),
    };
    let harness = Harness::from_config(common.config()?)?;
    let ok = harness.execute(command)?;
    println!("{} wrote {}", command.as_str(), harness.out_dir().display());
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            error!("one or more cells failed; see the reports");
            ExitCode::from(2)
        }
        Err(e) => {
            error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
