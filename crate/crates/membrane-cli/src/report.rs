//! Check records and CSV output.

use std::path::Path;

use anyhow::{Context, Result};
use membrane_acoustics::dynamics::{Diagnostics, Trajectory};
use serde::Serialize;

/// One named check: passes when `value <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub property: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn le(name: &str, property: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), property: property.into(), value, tolerance, passed: value <= tolerance }
    }

    /// A yes/no check, recorded as value 0 (holds) or 1 (fails).
    pub fn holds(name: &str, property: &str, holds: bool) -> Self {
        Self::le(name, property, if holds { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn line(&self) -> String {
        format!(
            "{:<4} {:<36} {:>10.3e} <= {:<10.3e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance,
            self.property
        )
    }
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt17(x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diagnostics(path: &Path, traj: &Trajectory<f64>) -> Result<()> {
    write_table(path, &Diagnostics::COLUMNS, traj.diagnostics.iter().map(|d| d.values().to_vec()))
}

pub fn write_checks(path: &Path, checks: &[Check]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["check", "property", "value", "tolerance", "pass"])?;
    for c in checks {
        w.write_record([c.name.clone(), c.property.clone(), fmt17(c.value), fmt17(c.tolerance), c.passed.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?).with_context(|| format!("writing {}", path.display()))
}
