use super::engine::{assemble_generator, Generator, Midpoint};
use super::state::{velocity_field, EulerianState, InitialState, LagrangianState, ModelTag, PotentialState};
use crate::bulk::{compatibility, divergence, ScalarBulkField, ToroidalField};
use crate::coefficients::Coefficients;
use crate::equilibria::{
    constraint_l, membership, project_structural, solve_projector_problem, special_equilibrium, ConfigurationPair,
    SpecialEquilibrium, DEFAULT_TOL_MEMBERSHIP,
};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::{DiscreteSpace, SurfaceField};

/// Relative tolerance for the integral constraints of the constrained tags.
pub const DEFAULT_TOL_CONSTRAINT: f64 = 1e-9;

/// Time stepping parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConfig {
    pub t_end: f64,
    pub dt: f64,
    pub output_every: usize,
}

impl TimeConfig {
    pub fn new(t_end: f64, dt: f64, output_every: usize) -> Self {
        Self { t_end, dt, output_every }
    }

    /// dt = 1e−3·b/√(B/ρ0), outputs every 10 steps.
    pub fn default_for<T: Real>(space: &DiscreteSpace<T>, coeffs: &Coefficients<T>, t_end: f64) -> Self {
        let dt = 1e-3 * space.outer_radius().as_f64() / coeffs.wave_speed().as_f64();
        Self { t_end, dt, output_every: 10 }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Trajectory(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Trajectory(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if self.output_every == 0 {
            return Err(Error::Trajectory("output_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    pub energy: f64,
    pub dissipation_cum: f64,
    pub l_value: f64,
    pub ell_value: f64,
    pub constraint_residual: f64,
    pub dist_to_equilibrium: f64,
    pub weak_residual_last: f64,
}

impl Diagnostics {
    pub const COLUMNS: [&'static str; 8] = [
        "t",
        "energy",
        "dissipation_cum",
        "L_value",
        "ell_value",
        "constraint_residual",
        "dist_to_equilibrium",
        "weak_residual_last",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.t,
            self.energy,
            self.dissipation_cum,
            self.l_value,
            self.ell_value,
            self.constraint_residual,
            self.dist_to_equilibrium,
            self.weak_residual_last,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum States<T: Real> {
    Lagrangian(Vec<LagrangianState<T>>),
    Eulerian(Vec<EulerianState<T>>),
    Potential(Vec<PotentialState<T>>),
}

impl<T: Real> States<T> {
    pub fn len(&self) -> usize {
        match self {
            Self::Lagrangian(s) => s.len(),
            Self::Eulerian(s) => s.len(),
            Self::Potential(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn times(&self) -> Vec<f64> {
        match self {
            Self::Lagrangian(s) => s.iter().map(|x| x.t).collect(),
            Self::Eulerian(s) => s.iter().map(|x| x.t).collect(),
            Self::Potential(s) => s.iter().map(|x| x.t).collect(),
        }
    }

    pub fn lagrangian(&self) -> Option<&[LagrangianState<T>]> {
        match self {
            Self::Lagrangian(s) => Some(s),
            _ => None,
        }
    }

    pub fn eulerian(&self) -> Option<&[EulerianState<T>]> {
        match self {
            Self::Eulerian(s) => Some(s),
            _ => None,
        }
    }

    pub fn potential(&self) -> Option<&[PotentialState<T>]> {
        match self {
            Self::Potential(s) => Some(s),
            _ => None,
        }
    }
}

/// States at output times with aligned diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub tag: ModelTag,
    pub dt: f64,
    pub output_every: usize,
    pub states: States<T>,
    pub diagnostics: Vec<Diagnostics>,
    /// Π_E(r0, v0) for Lagrangian runs.
    pub equilibrium: Option<ConfigurationPair<T>>,
    /// max over steps of |E(tⁿ⁺¹) − E(tⁿ) + dissipation step|.
    pub max_energy_defect: f64,
    /// Largest relative residual of the implicit step equations.
    pub max_step_residual: f64,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.times()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.energy).collect()
    }

    /// Output index of time t, matched to within a small fraction of dt.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let times = self.times();
        let slack = 1e-6 * self.dt.max(f64::MIN_POSITIVE);
        times.iter().position(|&s| (s - t).abs() <= slack).ok_or_else(|| {
            Error::Trajectory(format!(
                "time {t} is not an output time (span {:?} to {:?})",
                times.first(),
                times.last()
            ))
        })
    }
}

/// Shared context for evolution and diagnostics: the generator and the
/// special equilibrium of one coefficient set.
pub struct Model<'a, T: Real> {
    gen: Generator<'a, T>,
    eq: SpecialEquilibrium<T>,
}

impl<'a, T: Real> Model<'a, T> {
    pub fn new(space: &'a DiscreteSpace<T>, coeffs: &Coefficients<T>) -> Result<Self> {
        let gen = assemble_generator(space, coeffs)?;
        let eq = special_equilibrium(space, gen.membrane(), coeffs.bulk)?;
        Ok(Self { gen, eq })
    }

    pub fn space(&self) -> &'a DiscreteSpace<T> {
        self.gen.space()
    }

    pub fn coeffs(&self) -> &Coefficients<T> {
        self.gen.coeffs()
    }

    pub fn generator(&self) -> &Generator<'a, T> {
        &self.gen
    }

    pub fn special(&self) -> &SpecialEquilibrium<T> {
        &self.eq
    }

    fn membrane_energy(&self, v: &SurfaceField<T>, v_t: &SurfaceField<T>) -> T {
        let v = nalgebra::DVector::from_column_slice(v.coeffs());
        let w = nalgebra::DVector::from_column_slice(v_t.coeffs());
        v.dot(&(self.gen.membrane().matrix() * &v)) + w.dot(&(self.gen.mass_v() * &w))
    }

    /// ½∫ρ0|r_t|² + B|div r|² + ½∫_{Γ1} σ|∇v|² + μ|v_t|² + κ|v|².
    pub fn lagrangian_energy(&self, x: &LagrangianState<T>) -> Result<T> {
        let space = self.space();
        let c = self.coeffs();
        let div = divergence(space, &x.r)?;
        let bulk = c.rho0 * x.r_t.norm_l2_sq(space) + c.bulk * div.dot_l2(space, &div);
        Ok((bulk + self.membrane_energy(&x.v, &x.v_t)) * T::lit(0.5))
    }

    /// ½∫p²/B + ρ0|𝐯|² + the membrane terms.
    pub fn eulerian_energy(&self, x: &EulerianState<T>) -> T {
        let space = self.space();
        let c = self.coeffs();
        let bulk = x.p.dot_l2(space, &x.p) / c.bulk + c.rho0 * x.vvec.norm_l2_sq(space);
        (bulk + self.membrane_energy(&x.v, &x.v_t)) * T::lit(0.5)
    }

    pub fn potential_energy(&self, x: &PotentialState<T>) -> T {
        self.gen.energy(x)
    }

    /// ∫_Ω p − B∫_{Γ1} v.
    pub fn eulerian_constraint(&self, x: &EulerianState<T>) -> T {
        x.p.integrate(self.space()) - self.coeffs().bulk * x.v.integrate(self.space().outer_radius())
    }

    /// ρ0∫_Ω u_t − B∫_{Γ1} v.
    pub fn potential_constraint(&self, x: &PotentialState<T>) -> T {
        self.gen.constraint(x)
    }

    /// The ℒ⁰ configuration (r⁰, v) with div r⁰ = −(ρ0/B)u_t, curl-free and
    /// traces (0, −v). Compatibility holds up to round-off relative to
    /// `reference` (for a trajectory, the data scale at t = 0).
    pub fn configuration_from_potential(
        &self,
        u_t: &ScalarBulkField<T>,
        v: &SurfaceField<T>,
        reference: T,
    ) -> Result<ConfigurationPair<T>> {
        let space = self.space();
        let c = self.coeffs();
        let s = solve_projector_problem(
            space,
            &u_t.scale(-c.rho0 / c.bulk),
            &SurfaceField::zeros(space.l_max()),
            v,
            &ToroidalField::zeros(space),
            reference,
        )?;
        Ok(ConfigurationPair { s, z: v.clone() })
    }

    /// Scale of the data of the reconstruction problem for a potential state.
    pub fn reconstruction_scale(&self, x: &PotentialState<T>) -> T {
        let c = self.coeffs();
        let (_, scale) = compatibility(self.space(), &x.u_t.scale(c.rho0 / c.bulk), &SurfaceField::zeros(self.space().l_max()), &x.v);
        // Round-off in u_t and v scales with the whole state, including u.
        let floor = x.max_abs() * self.space().geometry().volume() * (c.rho0 / c.bulk).max(T::one());
        scale.max(floor)
    }

    /// Lagrangian state r = r⁰ + e.s, v = v + e.z, r_t = −∇u from a potential state.
    pub fn lagrangian_from_potential(
        &self,
        x: &PotentialState<T>,
        equilibrium: &ConfigurationPair<T>,
        reference: T,
    ) -> Result<LagrangianState<T>> {
        let space = self.space();
        let l0 = self.configuration_from_potential(&x.u_t, &x.v, reference)?;
        Ok(LagrangianState {
            r: &l0.s + &equilibrium.s,
            v: &l0.z + &equilibrium.z,
            r_t: velocity_field(space, &x.u, &x.v_t)?,
            v_t: x.v_t.clone(),
            t: x.t,
        })
    }

    pub fn eulerian_from_potential(&self, x: &PotentialState<T>) -> Result<EulerianState<T>> {
        Ok(EulerianState {
            p: x.u_t.scale(self.coeffs().rho0),
            vvec: velocity_field(self.space(), &x.u, &x.v_t)?,
            v: x.v.clone(),
            v_t: x.v_t.clone(),
            t: x.t,
        })
    }

    fn l0_distance(&self, l0: &ConfigurationPair<T>, r_t: &crate::bulk::VectorField<T>, v_t: &SurfaceField<T>) -> Result<T> {
        let space = self.space();
        let n = l0.norm_h1(space)?;
        let vt = v_t.norm_l2(space.outer_radius());
        Ok((n * n + r_t.norm_l2_sq(space) + vt * vt).sqrt())
    }

    /// ‖(r − r∞, v − v∞, r_t, v_t)‖ in H¹ × H¹(Γ1) × L² × L²(Γ1).
    pub fn distance_to(&self, x: &LagrangianState<T>, equilibrium: &ConfigurationPair<T>) -> Result<T> {
        let l0 = &x.configuration() - equilibrium;
        self.l0_distance(&l0, &x.r_t, &x.v_t)
    }

    /// Diagnostics of one Lagrangian state; `l0` is the constraint value at t = 0.
    pub fn diagnose_lagrangian(
        &self,
        x: &LagrangianState<T>,
        equilibrium: &ConfigurationPair<T>,
        l_initial: T,
    ) -> Result<Diagnostics> {
        let l = constraint_l(self.space(), &x.configuration())?;
        Ok(Diagnostics {
            t: x.t,
            energy: self.lagrangian_energy(x)?.as_f64(),
            dissipation_cum: 0.0,
            l_value: l.as_f64(),
            ell_value: (l / self.eq.l_value).as_f64(),
            constraint_residual: (l - l_initial).mag().as_f64(),
            dist_to_equilibrium: self.distance_to(x, equilibrium)?.as_f64(),
            weak_residual_last: 0.0,
        })
    }

    /// For Eulerian states L_value holds ∫p − B∫v and ℓ the matching multiple
    /// of L(s•, z•); the distance is ‖(p − p̄, 𝐯, v_t)‖.
    pub fn diagnose_eulerian(&self, x: &EulerianState<T>) -> Diagnostics {
        let space = self.space();
        let c = self.coeffs();
        let le = self.eulerian_constraint(x);
        let pbar = ScalarBulkField::constant(space, x.p.mean(space));
        let dp = (&x.p - &pbar).norm_l2(space);
        let vt = x.v_t.norm_l2(space.outer_radius());
        Diagnostics {
            t: x.t,
            energy: self.eulerian_energy(x).as_f64(),
            dissipation_cum: 0.0,
            l_value: le.as_f64(),
            ell_value: (-le / (c.bulk * self.eq.l_value)).as_f64(),
            constraint_residual: le.mag().as_f64(),
            dist_to_equilibrium: (dp * dp + x.vvec.norm_l2_sq(space) + vt * vt).sqrt().as_f64(),
            weak_residual_last: 0.0,
        }
    }

    /// As for Eulerian states, with ρ0∫u_t − B∫v; the distance is
    /// ‖(∇u, u_t, v_t)‖.
    pub fn diagnose_potential(&self, x: &PotentialState<T>) -> Diagnostics {
        let space = self.space();
        let c = self.coeffs();
        let lp = self.potential_constraint(x);
        let vt = x.v_t.norm_l2(space.outer_radius());
        let d = x.u.dot_gradient(space, &x.u) + x.u_t.dot_l2(space, &x.u_t) + vt * vt;
        Diagnostics {
            t: x.t,
            energy: self.potential_energy(x).as_f64(),
            dissipation_cum: 0.0,
            l_value: lp.as_f64(),
            ell_value: (-lp / (c.bulk * self.eq.l_value)).as_f64(),
            constraint_residual: lp.mag().as_f64(),
            dist_to_equilibrium: d.max(T::zero()).sqrt().as_f64(),
            weak_residual_last: 0.0,
        }
    }

    /// Checks the initial data against the tag and maps it to the engine.
    /// Returns the engine state and, for Lagrangian tags, Π_E(r0, v0).
    pub fn prepare(
        &self,
        tag: ModelTag,
        initial: &InitialState<T>,
    ) -> Result<(PotentialState<T>, Option<ConfigurationPair<T>>)> {
        let space = self.space();
        let c = self.coeffs();
        match (tag, initial) {
            (ModelTag::Lagrangian(model), InitialState::Lagrangian(x)) => {
                x.check(space)?;
                let config = x.configuration();
                let report = membership(space, &config, DEFAULT_TOL_MEMBERSHIP)?;
                if !report.contains(model) {
                    return Err(Error::Membership(format!(
                        "(r0, v0) is not in the configuration space of {model} (it lies in {:?})",
                        report.models.iter().map(|m| m.name()).collect::<Vec<_>>()
                    )));
                }
                let (onto_e, onto_l0) = project_structural(space, &config, &self.eq)?;
                let div0 = divergence(space, &onto_l0.s)?;
                let state = PotentialState {
                    u: x.r_t.potential().scale(-T::one()),
                    v: onto_l0.z,
                    u_t: div0.scale(-c.bulk / c.rho0),
                    v_t: x.v_t.clone(),
                    t: x.t,
                };
                Ok((state, Some(onto_e)))
            }
            (ModelTag::Eulerian { constrained }, InitialState::Eulerian(x)) => {
                x.check(space)?;
                let state = PotentialState {
                    u: x.vvec.potential().scale(-T::one()),
                    v: x.v.clone(),
                    u_t: x.p.scale(T::one() / c.rho0),
                    v_t: x.v_t.clone(),
                    t: x.t,
                };
                if constrained {
                    let scale = x.p.norm_l2(space) * space.geometry().volume().sqrt()
                        + c.bulk * x.v.norm_l2(space.outer_radius()) * space.geometry().area_gamma1().sqrt();
                    self.check_constraint(self.eulerian_constraint(x), scale, "∫p = B∫v")?;
                }
                Ok((state, None))
            }
            (ModelTag::Potential { constrained }, InitialState::Potential(x)) => {
                x.check(space)?;
                if constrained {
                    let scale = c.rho0 * x.u_t.norm_l2(space) * space.geometry().volume().sqrt()
                        + c.bulk * x.v.norm_l2(space.outer_radius()) * space.geometry().area_gamma1().sqrt();
                    self.check_constraint(self.potential_constraint(x), scale, "ρ0∫u_t = B∫v")?;
                }
                Ok((x.clone(), None))
            }
            _ => Err(Error::Membership(format!("initial state kind does not match the model tag {tag}"))),
        }
    }

    fn check_constraint(&self, value: T, scale: T, what: &str) -> Result<()> {
        let tol = DEFAULT_TOL_CONSTRAINT * scale.as_f64().max(f64::MIN_POSITIVE);
        if value.mag().as_f64() > tol {
            return Err(Error::Membership(format!(
                "constrained model requires {what}: residual {:.3e} exceeds {tol:.3e}",
                value.mag().as_f64()
            )));
        }
        Ok(())
    }

    /// Evolves the initial data and records states and diagnostics at output times.
    pub fn simulate(&self, tag: ModelTag, initial: &InitialState<T>, time: TimeConfig) -> Result<Trajectory<T>> {
        time.validate()?;
        let (mut x, equilibrium) = self.prepare(tag, initial)?;
        let stepper = Midpoint::new(&self.gen, T::lit(time.dt))?;
        let n_steps = time.n_steps();
        let t0 = x.t;

        let mut lagr = Vec::new();
        let mut eul = Vec::new();
        let mut pot = Vec::new();
        let mut diagnostics = Vec::new();
        let mut l_initial = T::zero();
        let reference = self.reconstruction_scale(&x);
        let mut cum = 0.0;
        let mut record = |x: &PotentialState<T>, cum: f64, res: f64, first: bool| -> Result<()> {
            let mut d = match tag {
                ModelTag::Lagrangian(_) => {
                    let e = equilibrium.as_ref().expect("set for Lagrangian tags");
                    let state = self.lagrangian_from_potential(x, e, reference)?;
                    if first {
                        l_initial = constraint_l(self.space(), &state.configuration())?;
                    }
                    let d = self.diagnose_lagrangian(&state, e, l_initial)?;
                    lagr.push(state);
                    d
                }
                ModelTag::Eulerian { .. } => {
                    let state = self.eulerian_from_potential(x)?;
                    let d = self.diagnose_eulerian(&state);
                    eul.push(state);
                    d
                }
                ModelTag::Potential { .. } => {
                    pot.push(x.clone());
                    self.diagnose_potential(x)
                }
            };
            d.dissipation_cum = cum;
            d.weak_residual_last = res;
            diagnostics.push(d);
            Ok(())
        };

        record(&x, 0.0, 0.0, true)?;
        let mut e_prev = self.gen.energy(&x);
        let mut max_defect = 0.0f64;
        let mut max_res = 0.0f64;
        for n in 1..=n_steps {
            let rep = stepper.step(&mut x)?;
            x.t = t0 + n as f64 * time.dt;
            let e = self.gen.energy(&x);
            max_defect = max_defect.max((e - e_prev + rep.dissipation).mag().as_f64());
            e_prev = e;
            cum += rep.dissipation.as_f64();
            let last_residual = rep.residual.as_f64();
            max_res = max_res.max(last_residual);
            if !last_residual.is_finite() {
                return Err(Error::Singular(format!("non-finite step residual at step {n}")));
            }
            if n % time.output_every == 0 || n == n_steps {
                record(&x, cum, last_residual, false)?;
            }
        }
        let states = match tag {
            ModelTag::Lagrangian(_) => States::Lagrangian(lagr),
            ModelTag::Eulerian { .. } => States::Eulerian(eul),
            ModelTag::Potential { .. } => States::Potential(pot),
        };
        Ok(Trajectory {
            tag,
            dt: time.dt,
            output_every: time.output_every,
            states,
            diagnostics,
            equilibrium,
            max_energy_defect: max_defect,
            max_step_residual: max_res,
        })
    }
}

/// Assembles the model and runs it.
pub fn simulate<T: Real>(
    space: &DiscreteSpace<T>,
    coeffs: &Coefficients<T>,
    tag: ModelTag,
    initial: &InitialState<T>,
    time: TimeConfig,
) -> Result<Trajectory<T>> {
    Model::new(space, coeffs)?.simulate(tag, initial, time)
}

/// Total energy of a Lagrangian state.
pub fn energy<T: Real>(space: &DiscreteSpace<T>, coeffs: &Coefficients<T>, state: &LagrangianState<T>) -> Result<T> {
    Model::new(space, coeffs)?.lagrangian_energy(state)
}

/// ∫ₛᵗ∫_{Γ1} δ|v_t|² as accumulated by the stepper; s and t must be output times.
pub fn dissipation_integral<T: Real>(traj: &Trajectory<T>, s: f64, t: f64) -> Result<f64> {
    if s > t {
        return Err(Error::Trajectory(format!("dissipation interval [{s}, {t}] is reversed")));
    }
    let i = traj.index_of(s)?;
    let j = traj.index_of(t)?;
    Ok(traj.diagnostics[j].dissipation_cum - traj.diagnostics[i].dissipation_cum)
}

/// Maximal drifts of the quantities a Lagrangian trajectory conserves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport {
    /// ‖toroidal(r(t)) − toroidal(r0)‖.
    pub toroidal: f64,
    /// ‖r·ν(t) − r·ν(0)‖ on Γ0.
    pub trace_gamma0: f64,
    /// ‖(r·ν + v)(t) − (r·ν + v)(0)‖ on Γ1.
    pub trace_gamma1: f64,
    /// |L(r(t), v(t)) − L(r0, v0)|.
    pub constraint: f64,
}

impl DriftReport {
    pub fn max(&self) -> f64 {
        self.toroidal.max(self.trace_gamma0).max(self.trace_gamma1).max(self.constraint)
    }
}

pub fn conserved_quantities<T: Real>(space: &DiscreteSpace<T>, traj: &Trajectory<T>) -> Result<DriftReport> {
    let states = traj
        .states
        .lagrangian()
        .ok_or_else(|| Error::Trajectory("conserved quantities need a Lagrangian trajectory".into()))?;
    let mut rep = DriftReport { toroidal: 0.0, trace_gamma0: 0.0, trace_gamma1: 0.0, constraint: 0.0 };
    let Some(first) = states.first() else { return Ok(rep) };
    let (a, b) = (space.inner_radius(), space.outer_radius());
    let l0 = constraint_l(space, &first.configuration())?;
    let g1_0 = first.r.trace_outer() + &first.v;
    for x in states {
        let mut tor = x.r.toroidal().clone();
        tor.axpy(-T::one(), first.r.toroidal());
        rep.toroidal = rep.toroidal.max(tor.norm_l2(space).as_f64());
        rep.trace_gamma0 = rep.trace_gamma0.max((x.r.trace_inner() - first.r.trace_inner()).norm_l2(a).as_f64());
        let g1 = x.r.trace_outer() + &x.v;
        rep.trace_gamma1 = rep.trace_gamma1.max((&g1 - &g1_0).norm_l2(b).as_f64());
        let l = constraint_l(space, &x.configuration())?;
        rep.constraint = rep.constraint.max((l - l0).mag().as_f64());
    }
    Ok(rep)
}
