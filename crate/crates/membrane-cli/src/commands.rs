//! The subcommands other than `verify`.

use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use membrane_acoustics::bulk::VectorField;
use membrane_acoustics::dynamics::{weak_residual, InitialState, Model, ModelTag, Trajectory};
use membrane_acoustics::equilibria::{
    constraint_l, ell, equilibrium_residual, membership, project_atomic, project_structural, project_structural_explicit,
    ConfigurationPair, LagrangianModel, DEFAULT_TOL_MEMBERSHIP,
};
use membrane_acoustics::spectral::{GeometryKind, SurfaceField};
use membrane_acoustics::transfer::{
    constraint_residuals, eulerian_to_lagrangian, lagrangian_to_eulerian, lagrangian_to_potential, potential_to_eulerian,
    potential_to_lagrangian, stationary_difference,
};
use membrane_acoustics::Space;
use serde_json::json;

use crate::config::{ExperimentConfig, InitialConfig, Resolved};
use crate::presets;
use crate::report::{fmt17, write_diagnostics, write_json, write_table, Check};
use crate::snapshot::{self, pair_fields, SnapshotFile};

/// Everything a subcommand needs.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub resolved: Resolved,
    pub out: PathBuf,
}

impl Experiment {
    pub fn new(mut config: ExperimentConfig) -> Result<Self> {
        let resolved = config.resolve()?;
        let out = config.output_dir.clone();
        Ok(Self { config, resolved, out })
    }

    pub fn space(&self) -> &Space {
        &self.resolved.space
    }

    pub fn model(&self) -> Result<Model<'_, f64>> {
        Ok(Model::new(&self.resolved.space, &self.resolved.coeffs)?)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn initial(&self, model: &Model<'_, f64>, tag: ModelTag) -> Result<InitialState<f64>> {
        match &self.config.initial {
            InitialConfig::Preset(p) => presets::build(model, tag, &p.preset, p.amplitude, self.config.seed),
            InitialConfig::Fields(f) => snapshot::initial_state(self.space(), tag, &f.fields),
            InitialConfig::Snapshot(s) => {
                let file = SnapshotFile::read(&s.snapshot)?;
                ensure!(
                    file.truncation == self.config.truncation && file.geometry == self.config.geometry,
                    "initial.snapshot: geometry or truncation differs from the configuration"
                );
                let Some(state) = file.states.get(s.index) else {
                    bail!("initial.snapshot: index {} out of range ({} states)", s.index, file.states.len());
                };
                snapshot::initial_state(self.space(), tag, &state.fields)
            }
        }
    }

    fn snapshot_of(&self, traj: &Trajectory<f64>) -> SnapshotFile {
        SnapshotFile::from_trajectory(self.space(), &self.config.geometry, &self.config.coefficients, traj)
    }
}

fn rel(x: f64, scale: f64) -> f64 {
    x / scale.max(f64::MIN_POSITIVE)
}

fn lagrangian_tag(tag: ModelTag, what: &str) -> Result<LagrangianModel> {
    match tag {
        ModelTag::Lagrangian(m) => Ok(m),
        other => bail!("{what} needs a Lagrangian model tag, got {other}"),
    }
}

/// max(floor, 5h²·max(1, T⁻²)) with h the output spacing and T the run
/// length: the trapezoid error in time is quadratic in h, and the test bumps
/// steepen as the run shortens.
pub fn weak_tolerance(traj: &Trajectory<f64>, floor: f64) -> f64 {
    let h = traj.dt * traj.output_every as f64;
    let span = traj.times().last().copied().unwrap_or(1.0);
    floor.max(5.0 * h * h * span.powi(-2).max(1.0))
}

/// Energy identity and constraint drift of a finished run.
fn run_checks(exp: &Experiment, traj: &Trajectory<f64>) -> Vec<Check> {
    let tol = &exp.config.tolerances;
    let e0 = traj.energies().first().copied().unwrap_or(0.0);
    let l0 = traj.diagnostics.first().map_or(0.0, |d| d.l_value);
    let drift = traj.diagnostics.iter().map(|d| (d.l_value - l0).abs()).fold(0.0, f64::max);
    let scale = traj.diagnostics.iter().map(|d| d.l_value.abs()).fold(1.0, f64::max);
    vec![
        Check::le("energy-identity", "per-step energy balance / E(0)", rel(traj.max_energy_defect, e0), tol.energy),
        Check::le("constraint-conservation", "drift of L over the run", drift / scale, tol.conservation),
    ]
}

pub fn simulate(exp: &Experiment) -> Result<Vec<Check>> {
    let model = exp.model()?;
    let tag = exp.resolved.tag;
    let initial = exp.initial(&model, tag)?;
    let mut traj = model.simulate(tag, &initial, exp.resolved.time)?;
    let mut checks = run_checks(exp, &traj);
    if traj.len() >= 3 && exp.config.suite.weak_tests > 0 {
        let rep = weak_residual(&model, &traj, exp.config.suite.weak_tests, exp.config.seed)?;
        let tol = weak_tolerance(&traj, exp.config.tolerances.residual);
        if let Some(d) = traj.diagnostics.last_mut() {
            d.weak_residual_last = rep.max_relative();
        }
        checks.push(Check::le("weak-residual", "relative weak-form residual", rep.max_relative(), tol));
    }
    write_diagnostics(&exp.path("trajectory.csv"), &traj)?;
    exp.snapshot_of(&traj).write(&exp.path("snapshots.json"))?;
    Ok(checks)
}

pub fn project(exp: &Experiment) -> Result<Vec<Check>> {
    let model = exp.model()?;
    let which = lagrangian_tag(exp.resolved.tag, "project")?;
    let InitialState::Lagrangian(x) = exp.initial(&model, exp.resolved.tag)? else { unreachable!("Lagrangian tag") };
    let space = exp.space();
    let eq = model.special();
    let tol = exp.config.tolerances;
    let p = x.configuration();
    let size = 1.0 + p.max_abs();
    let (onto_e, onto_l0) = project_structural(space, &p, eq)?;
    let (ex_e, ex_l0) = project_structural_explicit(space, &p, eq)?;
    let atomic = project_atomic(space, &p, eq)?;
    let (again_e, again_l0) = project_structural(space, &onto_l0, eq)?;
    let (_, e_res) = equilibrium_residual(space, &onto_e, model.coeffs().bulk, model.generator().membrane())?;
    let member = |q: &ConfigurationPair<f64>| -> Result<Vec<String>> {
        Ok(membership(space, q, DEFAULT_TOL_MEMBERSHIP)?.models.iter().map(|m| m.name().to_string()).collect())
    };
    let checks = vec![
        Check::le("structural-sum", "onto_E + onto_L0 = identity", (&(&onto_e + &onto_l0) - &p).max_abs() / size, tol.projector),
        Check::le("structural-idempotence", "onto_L0 of onto_L0", (&again_l0 - &onto_l0).max_abs() / size, tol.projector),
        Check::le("structural-complementarity", "onto_E of onto_L0", again_e.max_abs() / size, tol.projector),
        Check::holds("range-l0", "onto_L0 lies in the L0 space", membership(space, &onto_l0, tol.residual)?.contains(LagrangianModel::L0)),
        Check::le("range-e", "onto_E solves the equilibrium system", e_res / size, tol.residual),
        Check::le(
            "explicit-path",
            "two-branch problems agree",
            (&ex_e - &onto_e).max_abs().max((&ex_l0 - &onto_l0).max_abs()) / size,
            tol.projector,
        ),
        Check::le("atomic-sum", "four-way split sums to identity", (&atomic.sum() - &p).max_abs() / size, tol.projector),
    ];
    let doc = json!({
        "model": which.name(),
        "ell": ell(space, &p, eq)?,
        "L": constraint_l(space, &p)?,
        "input": { "fields": pair_fields(&p), "models": member(&p)? },
        "structural": {
            "onto_E": { "fields": pair_fields(&onto_e), "models": member(&onto_e)? },
            "onto_L0": { "fields": pair_fields(&onto_l0), "models": member(&onto_l0)? },
        },
        "atomic": {
            "on_l0": { "fields": pair_fields(&atomic.on_l0), "models": member(&atomic.on_l0)? },
            "on_e1": { "fields": pair_fields(&atomic.on_e1), "models": member(&atomic.on_e1)? },
            "on_e2": { "fields": pair_fields(&atomic.on_e2), "models": member(&atomic.on_e2)? },
            "on_ebullet": { "fields": pair_fields(&atomic.on_ebullet), "models": member(&atomic.on_ebullet)? },
        },
        "layout": snapshot::Layout::of(space),
    });
    write_json(&exp.path("projections.json"), &doc)?;
    Ok(checks)
}

pub fn equilibrium(exp: &Experiment) -> Result<Vec<Check>> {
    let model = exp.model()?;
    let space = exp.space();
    let c = model.coeffs();
    let eq = model.special();
    let geo = space.geometry();
    let b = space.outer_radius();
    let one = ConfigurationPair { s: VectorField::zeros(space), z: SurfaceField::one(space.l_max()) };
    let l_one = constraint_l(space, &one)?;
    let ell_special = ell(space, &eq.pair(), eq)?;
    let mut checks = vec![
        Check::le("special-ell", "ell(s•, z•) = 1", (ell_special - 1.0).abs(), 1e-12),
        Check::le("l-of-one", "L(0, 1) = |Γ1|", (l_one - geo.area_gamma1()).abs() / geo.area_gamma1(), 1e-10),
    ];
    let mut closed = serde_json::Map::new();
    if c.is_constant() && !eq.kappa_zero {
        let z_star = -c.bulk / c.kappa.mean();
        let dev = (&eq.z_bullet - &SurfaceField::constant(space.l_max(), z_star)).max_abs();
        checks.push(Check::le("z-star-closed-form", "z* = -B/κ0", dev / z_star.abs(), 1e-8));
        closed.insert("z_star".into(), json!(z_star));
        if geo.kind() == GeometryKind::Ball {
            let dev = (&eq.s_bullet - &VectorField::position(space, -1.0 / 3.0)).max_abs();
            checks.push(Check::le("s-star-closed-form", "s* = -x/3", dev / b, 1e-8));
            closed.insert("s_star".into(), json!("-x/3"));
        }
    }
    let doc = json!({
        "kappa_zero": eq.kappa_zero,
        "L_special": eq.l_value,
        "ell_special": ell_special,
        "L_of_one": l_one,
        "volume": geo.volume(),
        "area_gamma1": geo.area_gamma1(),
        "z_bullet_mean": eq.z_bullet.mean(),
        "special": pair_fields(&eq.pair()),
        "closed_form": closed,
        "layout": snapshot::Layout::of(space),
    });
    write_json(&exp.path("equilibrium.json"), &doc)?;
    println!("kappa_zero      {}", eq.kappa_zero);
    println!("L(s•, z•)       {}", fmt17(eq.l_value));
    println!("ell(s•, z•)     {}", fmt17(ell_special));
    println!("mean z•         {}", fmt17(eq.z_bullet.mean()));
    println!("L(0, 1)         {}", fmt17(l_one));
    Ok(checks)
}

pub fn transfer(exp: &Experiment) -> Result<Vec<Check>> {
    let Some(cfg) = &exp.config.transfer else { bail!("transfer: the configuration needs a \"transfer\" section") };
    let file = SnapshotFile::read(&cfg.input)?;
    let source_cfg = ExperimentConfig {
        geometry: file.geometry.clone(),
        truncation: file.truncation,
        coefficients: file.coefficients.clone(),
        ..ExperimentConfig::default()
    };
    let space = source_cfg.build_space()?;
    let coeffs = file.coefficients.build(space.l_max())?;
    coeffs.validate(&space).context("input coefficients")?;
    let model = Model::new(&space, &coeffs)?;
    let traj = file.trajectory(&space)?;
    let target = ModelTag::parse(&cfg.target).context("transfer.target")?;
    let tol = exp.config.tolerances;
    let mut checks = Vec::new();
    let out = match (traj.tag, target) {
        (ModelTag::Lagrangian(_), ModelTag::Eulerian { .. }) => {
            let out = lagrangian_to_eulerian(&model, &traj)?;
            if traj.tag == ModelTag::Lagrangian(LagrangianModel::L0) {
                let back = eulerian_to_lagrangian(&model, &out)?;
                let rep = stationary_difference(&model, &back, &traj)?;
                checks.push(Check::le("round-trip", "inverse recovers the input", rep.difference / rep.scale.max(1.0), tol.transfer));
            }
            out
        }
        (ModelTag::Lagrangian(_), ModelTag::Potential { .. }) => {
            let out = lagrangian_to_potential(&model, &traj)?;
            if matches!(out.tag, ModelTag::Potential { constrained: true }) {
                let back = potential_to_lagrangian(&model, &out)?;
                let rep = stationary_difference(&model, &back, &traj)?;
                checks.push(Check::le(
                    "round-trip",
                    "inverse recovers the input mod stationary",
                    rep.time_variation.max(rep.stationary_residual) / rep.scale.max(1.0),
                    tol.transfer,
                ));
            }
            out
        }
        (ModelTag::Eulerian { .. }, ModelTag::Lagrangian(LagrangianModel::L0)) => {
            let out = eulerian_to_lagrangian(&model, &traj)?;
            let again = lagrangian_to_eulerian(&model, &out)?;
            let rep = stationary_difference(&model, &again, &traj)?;
            checks.push(Check::le("round-trip", "forward map recovers the input", rep.difference / rep.scale.max(1.0), tol.transfer));
            out
        }
        (ModelTag::Potential { .. }, ModelTag::Lagrangian(LagrangianModel::L0)) => potential_to_lagrangian(&model, &traj)?,
        (ModelTag::Potential { .. }, ModelTag::Eulerian { .. }) => potential_to_eulerian(&model, &traj)?,
        (from, to) => bail!("no transfer map from {from} to {to}"),
    };
    if let ModelTag::Eulerian { constrained: want } | ModelTag::Potential { constrained: want } = target {
        let res = constraint_residuals(&model, &out)?;
        let worst = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let scale = out.diagnostics.iter().map(|d| d.energy.sqrt()).fold(1.0, f64::max);
        if want {
            checks.push(Check::le("constraint", "integral constraint of the target", worst / scale, 1e-9));
        }
        write_table(
            &exp.path("transfer_report.csv"),
            &["t", "constraint_residual"],
            out.diagnostics.iter().zip(&res).map(|(d, r)| vec![d.t, *r]),
        )?;
    } else {
        write_table(&exp.path("transfer_report.csv"), &["t", "L_value"], out.diagnostics.iter().map(|d| vec![d.t, d.l_value]))?;
    }
    write_diagnostics(&exp.path("trajectory.csv"), &out)?;
    SnapshotFile::from_trajectory(&space, &file.geometry, &file.coefficients, &out).write(&exp.path("snapshots.json"))?;
    Ok(checks)
}

pub fn stability(exp: &Experiment) -> Result<Vec<Check>> {
    let model = exp.model()?;
    lagrangian_tag(exp.resolved.tag, "stability")?;
    let initial = exp.initial(&model, exp.resolved.tag)?;
    let InitialState::Lagrangian(x0) = &initial else { unreachable!("Lagrangian tag") };
    let traj = model.simulate(exp.resolved.tag, &initial, exp.resolved.time)?;
    let tol = exp.config.tolerances;
    let d0 = traj.diagnostics[0].dist_to_equilibrium;
    let e = traj.energies();
    let rows: Vec<Vec<f64>> = traj
        .diagnostics
        .iter()
        .map(|d| vec![d.t, d.dist_to_equilibrium, rel(d.dist_to_equilibrium, d0), d.energy])
        .collect();
    write_table(&exp.path("stability.csv"), &["t", "dist_to_equilibrium", "ratio", "energy"], rows)?;
    write_diagnostics(&exp.path("trajectory.csv"), &traj)?;
    let ratio = rel(traj.diagnostics.last().expect("nonempty").dist_to_equilibrium, d0);
    let rise = e.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
    let (onto_e, _) = project_structural(exp.space(), &x0.configuration(), model.special())?;
    let limit = traj.equilibrium.as_ref().expect("Lagrangian runs record the limit");
    let mismatch = (limit - &onto_e).max_abs() / (1.0 + onto_e.max_abs());
    println!("initial distance {}", fmt17(d0));
    println!("final ratio      {}", fmt17(ratio));
    Ok(vec![
        Check::le("decay", "final / initial distance to the limit", ratio, tol.stability),
        Check::le("energy-monotone", "largest energy increase / E(0)", rel(rise, e[0]), 1e-12),
        Check::le("limit-equilibrium", "limit matches the structural projection", mismatch, 1e-3),
    ])
}
