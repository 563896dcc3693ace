//! Snapshot files: geometry, truncation, coefficients, the (l, m) index
//! table and flat coefficient arrays per field, for every output state.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use membrane_acoustics::bulk::{ScalarBulkField, ToroidalField, VectorField};
use membrane_acoustics::dynamics::{
    Diagnostics, EulerianState, InitialState, LagrangianState, ModelTag, PotentialState, States, Trajectory,
};
use membrane_acoustics::equilibria::ConfigurationPair;
use membrane_acoustics::spectral::SurfaceField;
use membrane_acoustics::Space;
use serde::{Deserialize, Serialize};

use crate::config::{CoefficientConfig, GeometryConfig, Truncation};

pub type Fields = BTreeMap<String, Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layout {
    /// (l, m) for each harmonic index.
    pub lm_table: Vec<(usize, i64)>,
    /// Radial quadrature nodes, the second index of bulk arrays.
    pub radial_nodes: Vec<f64>,
    pub bulk_order: String,
}

impl Layout {
    pub fn of(space: &Space) -> Self {
        Self {
            lm_table: space.index().iter().map(|(_, l, m)| (l, m)).collect(),
            radial_nodes: space.radial_nodes().to_vec(),
            bulk_order: "bulk arrays are [harmonic index][radial node], row-major".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    pub t: f64,
    pub fields: Fields,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub dissipation_cum: f64,
    #[serde(rename = "L_value")]
    pub l_value: f64,
    pub ell_value: f64,
    pub constraint_residual: f64,
    pub dist_to_equilibrium: f64,
    pub weak_residual_last: f64,
}

impl From<&Diagnostics> for DiagnosticsRecord {
    fn from(d: &Diagnostics) -> Self {
        Self {
            t: d.t,
            energy: d.energy,
            dissipation_cum: d.dissipation_cum,
            l_value: d.l_value,
            ell_value: d.ell_value,
            constraint_residual: d.constraint_residual,
            dist_to_equilibrium: d.dist_to_equilibrium,
            weak_residual_last: d.weak_residual_last,
        }
    }
}

impl From<&DiagnosticsRecord> for Diagnostics {
    fn from(d: &DiagnosticsRecord) -> Self {
        Self {
            t: d.t,
            energy: d.energy,
            dissipation_cum: d.dissipation_cum,
            l_value: d.l_value,
            ell_value: d.ell_value,
            constraint_residual: d.constraint_residual,
            dist_to_equilibrium: d.dist_to_equilibrium,
            weak_residual_last: d.weak_residual_last,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotFile {
    pub geometry: GeometryConfig,
    pub truncation: Truncation,
    pub coefficients: CoefficientConfig,
    pub model: String,
    pub dt: f64,
    pub output_every: usize,
    pub layout: Layout,
    pub states: Vec<StateRecord>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<Fields>,
}

impl SnapshotFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).with_context(|| format!("writing {}", path.display()))
    }

    pub fn from_trajectory(
        space: &Space,
        geometry: &GeometryConfig,
        coefficients: &CoefficientConfig,
        traj: &Trajectory<f64>,
    ) -> Self {
        let states = match &traj.states {
            States::Lagrangian(xs) => xs.iter().map(|x| StateRecord { t: x.t, fields: lagrangian_fields(x) }).collect(),
            States::Eulerian(xs) => xs.iter().map(|x| StateRecord { t: x.t, fields: eulerian_fields(x) }).collect(),
            States::Potential(xs) => xs.iter().map(|x| StateRecord { t: x.t, fields: potential_fields(x) }).collect(),
        };
        Self {
            geometry: geometry.clone(),
            truncation: Truncation { l_max: space.l_max(), n_r: space.n_r() },
            coefficients: coefficients.clone(),
            model: traj.tag.name(),
            dt: traj.dt,
            output_every: traj.output_every,
            layout: Layout::of(space),
            states,
            diagnostics: traj.diagnostics.iter().map(DiagnosticsRecord::from).collect(),
            equilibrium: traj.equilibrium.as_ref().map(pair_fields),
        }
    }

    pub fn tag(&self) -> Result<ModelTag> {
        ModelTag::parse(&self.model).ok_or_else(|| anyhow!("unknown model tag {:?} in snapshot file", self.model))
    }

    pub fn trajectory(&self, space: &Space) -> Result<Trajectory<f64>> {
        let tag = self.tag()?;
        let states = match tag {
            ModelTag::Lagrangian(_) => States::Lagrangian(
                self.states.iter().map(|s| lagrangian_state(space, &s.fields, s.t)).collect::<Result<_>>()?,
            ),
            ModelTag::Eulerian { .. } => States::Eulerian(
                self.states.iter().map(|s| eulerian_state(space, &s.fields, s.t)).collect::<Result<_>>()?,
            ),
            ModelTag::Potential { .. } => States::Potential(
                self.states.iter().map(|s| potential_state(space, &s.fields, s.t)).collect::<Result<_>>()?,
            ),
        };
        if self.diagnostics.len() != states.len() {
            bail!("snapshot file has {} states but {} diagnostics rows", states.len(), self.diagnostics.len());
        }
        Ok(Trajectory {
            tag,
            dt: self.dt,
            output_every: self.output_every,
            states,
            diagnostics: self.diagnostics.iter().map(Diagnostics::from).collect(),
            equilibrium: self.equilibrium.as_ref().map(|f| pair_from(space, f)).transpose()?,
            max_energy_defect: 0.0,
            max_step_residual: 0.0,
        })
    }
}

fn put_vector(fields: &mut Fields, name: &str, v: &VectorField<f64>) {
    fields.insert(format!("{name}.potential"), v.potential().data().to_vec());
    fields.insert(format!("{name}.trace_inner"), v.trace_inner().coeffs().to_vec());
    fields.insert(format!("{name}.trace_outer"), v.trace_outer().coeffs().to_vec());
    fields.insert(format!("{name}.toroidal"), v.toroidal().data().to_vec());
}

pub fn pair_fields(p: &ConfigurationPair<f64>) -> Fields {
    let mut f = Fields::new();
    put_vector(&mut f, "s", &p.s);
    f.insert("z".into(), p.z.coeffs().to_vec());
    f
}

pub fn lagrangian_fields(x: &LagrangianState<f64>) -> Fields {
    let mut f = Fields::new();
    put_vector(&mut f, "r", &x.r);
    put_vector(&mut f, "r_t", &x.r_t);
    f.insert("v".into(), x.v.coeffs().to_vec());
    f.insert("v_t".into(), x.v_t.coeffs().to_vec());
    f
}

pub fn eulerian_fields(x: &EulerianState<f64>) -> Fields {
    let mut f = Fields::new();
    f.insert("p".into(), x.p.data().to_vec());
    put_vector(&mut f, "vvec", &x.vvec);
    f.insert("v".into(), x.v.coeffs().to_vec());
    f.insert("v_t".into(), x.v_t.coeffs().to_vec());
    f
}

pub fn potential_fields(x: &PotentialState<f64>) -> Fields {
    let mut f = Fields::new();
    for (k, v) in [("u", &x.u), ("u_t", &x.u_t)] {
        f.insert(k.into(), v.data().to_vec());
    }
    f.insert("v".into(), x.v.coeffs().to_vec());
    f.insert("v_t".into(), x.v_t.coeffs().to_vec());
    f
}

fn get<'f>(fields: &'f Fields, name: &str) -> Result<&'f [f64]> {
    fields.get(name).map(Vec::as_slice).ok_or_else(|| anyhow!("missing field {name:?}"))
}

fn scalar(space: &Space, fields: &Fields, name: &str) -> Result<ScalarBulkField<f64>> {
    ScalarBulkField::from_data(space.l_max(), space.n_r(), get(fields, name)?.to_vec()).with_context(|| format!("field {name}"))
}

fn surface(space: &Space, fields: &Fields, name: &str) -> Result<SurfaceField<f64>> {
    SurfaceField::from_coeffs(space.l_max(), get(fields, name)?.to_vec()).with_context(|| format!("field {name}"))
}

fn vector(space: &Space, fields: &Fields, name: &str) -> Result<VectorField<f64>> {
    let tor = ToroidalField::from_data(space.l_max(), space.n_r(), get(fields, &format!("{name}.toroidal"))?.to_vec())
        .with_context(|| format!("field {name}.toroidal"))?;
    VectorField::from_parts(
        space,
        scalar(space, fields, &format!("{name}.potential"))?,
        surface(space, fields, &format!("{name}.trace_inner"))?,
        surface(space, fields, &format!("{name}.trace_outer"))?,
        tor,
    )
    .with_context(|| format!("field {name}"))
}

fn check_names(fields: &Fields, allowed: &[&str]) -> Result<()> {
    for k in fields.keys() {
        let base = k.split('.').next().unwrap_or(k);
        if !allowed.contains(&base) {
            bail!("unexpected field {k:?} (expected fields of {allowed:?})");
        }
    }
    Ok(())
}

fn pair_from(space: &Space, fields: &Fields) -> Result<ConfigurationPair<f64>> {
    check_names(fields, &["s", "z"])?;
    Ok(ConfigurationPair { s: vector(space, fields, "s")?, z: surface(space, fields, "z")? })
}

pub fn lagrangian_state(space: &Space, f: &Fields, t: f64) -> Result<LagrangianState<f64>> {
    check_names(f, &["r", "r_t", "v", "v_t"])?;
    Ok(LagrangianState {
        r: vector(space, f, "r")?,
        v: surface(space, f, "v")?,
        r_t: vector(space, f, "r_t")?,
        v_t: surface(space, f, "v_t")?,
        t,
    })
}

pub fn eulerian_state(space: &Space, f: &Fields, t: f64) -> Result<EulerianState<f64>> {
    check_names(f, &["p", "vvec", "v", "v_t"])?;
    Ok(EulerianState {
        p: scalar(space, f, "p")?,
        vvec: vector(space, f, "vvec")?,
        v: surface(space, f, "v")?,
        v_t: surface(space, f, "v_t")?,
        t,
    })
}

pub fn potential_state(space: &Space, f: &Fields, t: f64) -> Result<PotentialState<f64>> {
    check_names(f, &["u", "u_t", "v", "v_t"])?;
    Ok(PotentialState {
        u: scalar(space, f, "u")?,
        v: surface(space, f, "v")?,
        u_t: scalar(space, f, "u_t")?,
        v_t: surface(space, f, "v_t")?,
        t,
    })
}

/// An initial state of the kind the tag expects.
pub fn initial_state(space: &Space, tag: ModelTag, f: &Fields) -> Result<InitialState<f64>> {
    Ok(match tag {
        ModelTag::Lagrangian(_) => InitialState::Lagrangian(lagrangian_state(space, f, 0.0)?),
        ModelTag::Eulerian { .. } => InitialState::Eulerian(eulerian_state(space, f, 0.0)?),
        ModelTag::Potential { .. } => InitialState::Potential(potential_state(space, f, 0.0)?),
    })
}

pub fn initial_fields(x: &InitialState<f64>) -> Fields {
    match x {
        InitialState::Lagrangian(x) => lagrangian_fields(x),
        InitialState::Eulerian(x) => eulerian_fields(x),
        InitialState::Potential(x) => potential_fields(x),
    }
}
