use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use membrane_cli::config::ExperimentConfig;
use membrane_cli::{run, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Evolve initial data; trajectory CSV and snapshots.
    Simulate,
    /// Structural and atomic projections of the initial configuration.
    Project,
    /// The special equilibrium and the constraint values.
    Equilibrium,
    /// Map a trajectory to another model.
    Transfer,
    /// Run the property suite.
    Verify,
    /// Damped long run with the distance to the limit equilibrium.
    Stability,
}

#[derive(Debug, Parser)]
#[command(name = "membrane-lab", version, about = "Acoustic waves with a membrane boundary: simulation and checks")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized data (overrides the configuration).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let mut config = match &args.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let cmd = match args.command {
        Command::Simulate => Subcommand::Simulate,
        Command::Project => Subcommand::Project,
        Command::Equilibrium => Subcommand::Equilibrium,
        Command::Transfer => Subcommand::Transfer,
        Command::Verify => Subcommand::Verify,
        Command::Stability => Subcommand::Stability,
    };
    match run(cmd, config) {
        Ok(checks) => {
            for c in &checks {
                println!("{}", c.line());
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{cmd}: {} checks, {failed} failed", checks.len());
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
