//! Experiment configuration: JSON in, validated library objects out.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use membrane_acoustics::coefficients::Coefficients;
use membrane_acoustics::dynamics::{ModelTag, TimeConfig};
use membrane_acoustics::spectral::{DiscreteSpace, Geometry, SurfaceField};
use membrane_acoustics::Space;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeometryConfig {
    Ball { b: f64 },
    Shell { a: f64, b: f64 },
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self::Ball { b: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    pub l_max: usize,
    pub n_r: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { l_max: 4, n_r: 16 }
    }
}

/// A constant, or spherical-harmonic coefficients in (l, m) index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientValue {
    Constant(f64),
    Field(Vec<f64>),
}

impl CoefficientValue {
    fn field(&self, name: &str, l_max: usize) -> Result<SurfaceField<f64>> {
        match self {
            Self::Constant(c) => Ok(SurfaceField::constant(l_max, *c)),
            Self::Field(v) => {
                let n = (l_max + 1) * (l_max + 1);
                ensure!(v.len() == n, "coefficients.{name}: expected {n} harmonic coefficients for l_max = {l_max}, got {}", v.len());
                Ok(SurfaceField::from_coeffs(l_max, v.clone())?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    pub rho0: f64,
    #[serde(rename = "B")]
    pub bulk: f64,
    pub mu: CoefficientValue,
    pub sigma: CoefficientValue,
    pub delta: CoefficientValue,
    pub kappa: CoefficientValue,
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        use CoefficientValue::Constant;
        Self { rho0: 1.0, bulk: 1.0, mu: Constant(1.0), sigma: Constant(1.0), delta: Constant(0.0), kappa: Constant(1.0) }
    }
}

impl CoefficientConfig {
    pub fn build(&self, l_max: usize) -> Result<Coefficients<f64>> {
        Ok(Coefficients {
            rho0: self.rho0,
            bulk: self.bulk,
            mu: self.mu.field("mu", l_max)?,
            sigma: self.sigma.field("sigma", l_max)?,
            delta: self.delta.field("delta", l_max)?,
            kappa: self.kappa.field("kappa", l_max)?,
        })
    }

    pub fn from_coefficients(c: &Coefficients<f64>) -> Self {
        let value = |f: &SurfaceField<f64>| {
            if f.coeffs()[1..].iter().all(|&x| x == 0.0) {
                CoefficientValue::Constant(f.mean())
            } else {
                CoefficientValue::Field(f.coeffs().to_vec())
            }
        };
        Self {
            rho0: c.rho0,
            bulk: c.bulk,
            mu: value(&c.mu),
            sigma: value(&c.sigma),
            delta: value(&c.delta),
            kappa: value(&c.kappa),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetInitial {
    pub preset: String,
    #[serde(default = "one")]
    pub amplitude: f64,
}

/// Flat coefficient arrays, named as in snapshot files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsInitial {
    pub fields: BTreeMap<String, Vec<f64>>,
}

/// One state of a snapshots file written by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotInitial {
    pub snapshot: PathBuf,
    #[serde(default)]
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialConfig {
    Preset(PresetInitial),
    Fields(FieldsInitial),
    Snapshot(SnapshotInitial),
}

fn one() -> f64 {
    1.0
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self::Preset(PresetInitial { preset: "random".into(), amplitude: 1.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSettings {
    pub t_end: f64,
    /// Defaults to 1e-3·b/c.
    #[serde(default)]
    pub dt: Option<f64>,
    pub output_every: usize,
}

impl Default for TimeSettings {
    fn default() -> Self {
        Self { t_end: 1.0, dt: None, output_every: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Per-step energy identity defect, relative to E(0).
    pub energy: f64,
    /// Conserved-quantity drift, relative to the state size.
    pub conservation: f64,
    pub projector: f64,
    pub residual: f64,
    pub transfer: f64,
    /// Final over initial distance to the limit equilibrium.
    pub stability: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { energy: 1e-9, conservation: 1e-9, projector: 1e-10, residual: 1e-8, transfer: 1e-8, stability: 1e-3 }
    }
}

/// Sample counts for the randomized checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteSettings {
    pub pairs: usize,
    pub weak_tests: usize,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        Self { pairs: 20, weak_tests: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    /// A snapshots file written by `simulate` or `transfer`.
    pub input: PathBuf,
    /// Target model tag: "E", "Ec", "P", "Pc" or "L0".
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default)]
    pub coefficients: CoefficientConfig,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub time: TimeSettings,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub suite: SuiteSettings,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferConfig>,
}

fn default_model() -> String {
    "L".into()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            truncation: Truncation::default(),
            coefficients: CoefficientConfig::default(),
            model: default_model(),
            initial: InitialConfig::default(),
            time: TimeSettings::default(),
            tolerances: Tolerances::default(),
            suite: SuiteSettings::default(),
            seed: 0,
            output_dir: default_output_dir(),
            transfer: None,
        }
    }
}

/// Library objects built from a validated configuration.
pub struct Resolved {
    pub space: Space,
    pub coeffs: Coefficients<f64>,
    pub tag: ModelTag,
    pub time: TimeConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn build_space(&self) -> Result<Space> {
        let geometry = match self.geometry {
            GeometryConfig::Ball { b } => Geometry::ball(b),
            GeometryConfig::Shell { a, b } => Geometry::shell(a, b),
        }
        .context("geometry")?;
        DiscreteSpace::new(geometry, self.truncation.l_max, self.truncation.n_r).context("truncation")
    }

    /// Checks everything and fills defaults (dt) so the result re-runs identically.
    pub fn resolve(&mut self) -> Result<Resolved> {
        let space = self.build_space()?;
        let coeffs = self.coefficients.build(space.l_max())?;
        coeffs.validate(&space).context("coefficients")?;
        let Some(tag) = ModelTag::parse(&self.model) else {
            bail!("model: unknown tag {:?} (expected L, L0..L4, E, Ec, P or Pc)", self.model);
        };
        let t = &mut self.time;
        ensure!(t.t_end.is_finite() && t.t_end >= 0.0, "time.t_end must be finite and nonnegative");
        ensure!(t.output_every >= 1, "time.output_every must be at least 1");
        let dt = t.dt.unwrap_or_else(|| TimeConfig::default_for(&space, &coeffs, t.t_end).dt);
        ensure!(dt.is_finite() && dt > 0.0, "time.dt must be positive");
        t.dt = Some(dt);
        let tol = &self.tolerances;
        for (name, v) in [
            ("energy", tol.energy),
            ("conservation", tol.conservation),
            ("projector", tol.projector),
            ("residual", tol.residual),
            ("transfer", tol.transfer),
            ("stability", tol.stability),
        ] {
            ensure!(v.is_finite() && v > 0.0, "tolerances.{name} must be positive");
        }
        if let InitialConfig::Preset(PresetInitial { preset, amplitude }) = &self.initial {
            ensure!(crate::presets::NAMES.contains(&preset.as_str()), "initial.preset: unknown preset {preset:?} (expected one of {:?})", crate::presets::NAMES);
            ensure!(amplitude.is_finite(), "initial.amplitude must be finite");
        }
        if let Some(tr) = &self.transfer {
            ensure!(
                matches!(ModelTag::parse(&tr.target), Some(ModelTag::Eulerian { .. } | ModelTag::Potential { .. }) | Some(ModelTag::Lagrangian(_))),
                "transfer.target: unknown tag {:?}",
                tr.target
            );
        }
        Ok(Resolved { space, coeffs, tag, time: TimeConfig::new(self.time.t_end, dt, self.time.output_every) })
    }
}
