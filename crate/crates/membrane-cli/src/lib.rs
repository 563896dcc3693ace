//! Experiment runner for the membrane-acoustics simulator.
//!
//! Each subcommand reads an [`config::ExperimentConfig`], writes its
//! artifacts under the output directory and returns the list of checks it
//! ran; the binary exits nonzero when any check fails.

pub mod commands;
pub mod config;
pub mod presets;
pub mod report;
pub mod snapshot;
pub mod verify;

use std::fmt;

use anyhow::{Context, Result};

use crate::commands::Experiment;
use crate::config::ExperimentConfig;
use crate::report::{write_checks, write_json, Check};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Simulate,
    Project,
    Equilibrium,
    Transfer,
    Verify,
    Stability,
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Simulate => "simulate",
            Self::Project => "project",
            Self::Equilibrium => "equilibrium",
            Self::Transfer => "transfer",
            Self::Verify => "verify",
            Self::Stability => "stability",
        })
    }
}

/// Validates the configuration, runs the subcommand and writes
/// `resolved-config.json` and `checks.csv` next to its artifacts.
pub fn run(cmd: Subcommand, config: ExperimentConfig) -> Result<Vec<Check>> {
    let exp = Experiment::new(config)?;
    std::fs::create_dir_all(&exp.out).with_context(|| format!("creating {}", exp.out.display()))?;
    write_json(&exp.path("resolved-config.json"), &exp.config)?;
    let checks = match cmd {
        Subcommand::Simulate => commands::simulate(&exp)?,
        Subcommand::Project => commands::project(&exp)?,
        Subcommand::Equilibrium => commands::equilibrium(&exp)?,
        Subcommand::Transfer => commands::transfer(&exp)?,
        Subcommand::Verify => verify::run(&exp)?,
        Subcommand::Stability => commands::stability(&exp)?,
    };
    write_checks(&exp.path("checks.csv"), &checks)?;
    Ok(checks)
}
