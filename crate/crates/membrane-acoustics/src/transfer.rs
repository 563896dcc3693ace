//! Maps between the Lagrangian, Eulerian and potential descriptions of a
//! trajectory, the integral constraints, and comparison modulo stationary
//! solutions.

use crate::bulk::{divergence, solve_div_curl, ScalarBulkField, ToroidalField, VectorField, DEFAULT_TOL_COMPAT};
use crate::dynamics::{
    velocity_field, EulerianState, LagrangianState, Model, ModelTag, PotentialState, States, Trajectory,
};
use crate::equilibria::{constraint_l, equilibrium_residual, ConfigurationPair, LagrangianModel};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::SurfaceField;

/// Relative tolerance for the gradient identity ∇u = −r_t.
pub const TOL_GRADIENT_IDENTITY: f64 = 1e-8;

fn constrained_lagrangian(tag: ModelTag) -> bool {
    use LagrangianModel::*;
    matches!(tag, ModelTag::Lagrangian(L0 | L1 | L2 | L3))
}

fn with_states<T: Real>(source: &Trajectory<T>, tag: ModelTag, states: States<T>, model: &Model<'_, T>) -> Result<Trajectory<T>> {
    let mut diagnostics = Vec::with_capacity(states.len());
    match &states {
        States::Lagrangian(xs) => {
            let zero = ConfigurationPair::zeros(model.space());
            let l0 = match xs.first() {
                Some(x) => constraint_l(model.space(), &x.configuration())?,
                None => T::zero(),
            };
            for x in xs {
                diagnostics.push(model.diagnose_lagrangian(x, &zero, l0)?);
            }
        }
        States::Eulerian(xs) => diagnostics.extend(xs.iter().map(|x| model.diagnose_eulerian(x))),
        States::Potential(xs) => diagnostics.extend(xs.iter().map(|x| model.diagnose_potential(x))),
    }
    for (d, s) in diagnostics.iter_mut().zip(&source.diagnostics) {
        d.dissipation_cum = s.dissipation_cum;
        d.weak_residual_last = s.weak_residual_last;
    }
    Ok(Trajectory {
        tag,
        dt: source.dt,
        output_every: source.output_every,
        states,
        diagnostics,
        equilibrium: None,
        max_energy_defect: source.max_energy_defect,
        max_step_residual: source.max_step_residual,
    })
}

fn expect_lagrangian<'t, T: Real>(traj: &'t Trajectory<T>) -> Result<&'t [LagrangianState<T>]> {
    traj.states.lagrangian().ok_or_else(|| Error::Trajectory(format!("expected a Lagrangian trajectory, got {}", traj.tag)))
}

fn expect_eulerian<'t, T: Real>(traj: &'t Trajectory<T>) -> Result<&'t [EulerianState<T>]> {
    traj.states.eulerian().ok_or_else(|| Error::Trajectory(format!("expected an Eulerian trajectory, got {}", traj.tag)))
}

fn expect_potential<'t, T: Real>(traj: &'t Trajectory<T>) -> Result<&'t [PotentialState<T>]> {
    traj.states.potential().ok_or_else(|| Error::Trajectory(format!("expected a potential trajectory, got {}", traj.tag)))
}

/// p = −B div r, 𝐯 = r_t, v unchanged.
pub fn lagrangian_state_to_eulerian<T: Real>(model: &Model<'_, T>, x: &LagrangianState<T>) -> Result<EulerianState<T>> {
    Ok(EulerianState {
        p: divergence(model.space(), &x.r)?.scale(-model.coeffs().bulk),
        vvec: x.r_t.clone(),
        v: x.v.clone(),
        v_t: x.v_t.clone(),
        t: x.t,
    })
}

pub fn lagrangian_to_eulerian<T: Real>(model: &Model<'_, T>, traj: &Trajectory<T>) -> Result<Trajectory<T>> {
    let xs = expect_lagrangian(traj)?;
    let states = xs.iter().map(|x| lagrangian_state_to_eulerian(model, x)).collect::<Result<Vec<_>>>()?;
    let tag = ModelTag::Eulerian { constrained: constrained_lagrangian(traj.tag) };
    with_states(traj, tag, States::Eulerian(states), model)
}

/// The ℒ⁰ preimage: div r = −p/B, curl r = 0, r·ν = 0 on Γ0, r·ν = −v on Γ1.
pub fn eulerian_state_to_lagrangian<T: Real>(model: &Model<'_, T>, x: &EulerianState<T>) -> Result<LagrangianState<T>> {
    let space = model.space();
    let r = solve_div_curl(
        space,
        &x.p.scale(-T::one() / model.coeffs().bulk),
        &SurfaceField::zeros(space.l_max()),
        &x.v,
        &ToroidalField::zeros(space),
        DEFAULT_TOL_COMPAT,
    )
    .map_err(|e| match e {
        Error::Compatibility { residual, tolerance } => Error::Membership(format!(
            "∫p = B∫v fails (residual {residual:.3e}, tolerance {tolerance:.3e}): no ℒ⁰ preimage"
        )),
        other => other,
    })?;
    Ok(LagrangianState { r, v: x.v.clone(), r_t: x.vvec.clone(), v_t: x.v_t.clone(), t: x.t })
}

pub fn eulerian_to_lagrangian<T: Real>(model: &Model<'_, T>, traj: &Trajectory<T>) -> Result<Trajectory<T>> {
    let xs = expect_eulerian(traj)?;
    let states = xs.iter().map(|x| eulerian_state_to_lagrangian(model, x)).collect::<Result<Vec<_>>>()?;
    with_states(traj, ModelTag::Lagrangian(LagrangianModel::L0), States::Lagrangian(states), model)
}

/// u(t) = u(0) − (B/ρ0)∫₀ᵗ div r with ∇u(0) = −r_t(0), the time integral by
/// the trapezoid rule over output times (the stepper's rule when every step
/// is output). Fails when ∇u = −r_t is violated at some output time; the
/// returned u is −φ(r_t) plus the integrated mean.
pub fn lagrangian_to_potential<T: Real>(model: &Model<'_, T>, traj: &Trajectory<T>) -> Result<Trajectory<T>> {
    let xs = expect_lagrangian(traj)?;
    let space = model.space();
    let c = model.coeffs();
    let factor = -c.bulk / c.rho0;
    let mut states = Vec::with_capacity(xs.len());
    let mut prev: Option<(f64, ScalarBulkField<T>, ScalarBulkField<T>)> = None;
    for x in xs {
        let u_t = divergence(space, &x.r)?.scale(factor);
        let u = match &prev {
            None => x.r_t.potential().scale(-T::one()),
            Some((t, u, a)) => {
                let h = T::lit(0.5 * (x.t - t));
                let mut next = u.clone();
                next.axpy(h, a);
                next.axpy(h, &u_t);
                next
            }
        };
        let mismatch = (&u.clone().pinned(space) + x.r_t.potential()).gradient_norm(space);
        let scale = x.r_t.norm_l2(space) + u.gradient_norm(space);
        if mismatch.as_f64() > TOL_GRADIENT_IDENTITY * scale.as_f64().max(f64::MIN_POSITIVE) {
            return Err(Error::Trajectory(format!(
                "∇u = −r_t fails at t = {} by {:.3e}; outputs are too sparse for the time integral",
                x.t,
                mismatch.as_f64()
            )));
        }
        // The verified gradient fixes u up to its mean; the quadrature fixes
        // the mean. This keeps step-by-step round-off out of ∇u.
        let mut out = x.r_t.potential().scale(-T::one());
        out += &ScalarBulkField::constant(space, u.mean(space));
        states.push(PotentialState { u: out, v: x.v.clone(), u_t: u_t.clone(), v_t: x.v_t.clone(), t: x.t });
        prev = Some((x.t, u, u_t));
    }
    let tag = ModelTag::Potential { constrained: constrained_lagrangian(traj.tag) };
    with_states(traj, tag, States::Potential(states), model)
}

/// Per state: div r = −(ρ0/B)u_t, curl-free, traces (0, −v); r_t = −∇u.
pub fn potential_to_lagrangian<T: Real>(model: &Model<'_, T>, traj: &Trajectory<T>) -> Result<Trajectory<T>> {
    let xs = expect_potential(traj)?;
    let reference = xs.first().map(|x| model.reconstruction_scale(x)).unwrap_or_else(T::zero);
    let states = xs
        .iter()
        .map(|x| {
            let p = model.configuration_from_potential(&x.u_t, &x.v, reference)?;
            Ok(LagrangianState {
                r: p.s,
                v: p.z,
                r_t: velocity_field(model.space(), &x.u, &x.v_t)?,
                v_t: x.v_t.clone(),
                t: x.t,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    with_states(traj, ModelTag::Lagrangian(LagrangianModel::L0), States::Lagrangian(states), model)
}

/// p = ρ0u_t, 𝐯 = −∇u, v unchanged.
pub fn potential_to_eulerian<T: Real>(model: &Model<'_, T>, traj: &Trajectory<T>) -> Result<Trajectory<T>> {
    let xs = expect_potential(traj)?;
    let states = xs.iter().map(|x| model.eulerian_from_potential(x)).collect::<Result<Vec<_>>>()?;
    let constrained = matches!(traj.tag, ModelTag::Potential { constrained: true });
    with_states(traj, ModelTag::Eulerian { constrained }, States::Eulerian(states), model)
}

/// ∫p − B∫v per Eulerian state, or ρ0∫u_t − B∫v per potential state.
pub fn constraint_residuals<T: Real>(model: &Model<'_, T>, traj: &Trajectory<T>) -> Result<Vec<T>> {
    match &traj.states {
        States::Eulerian(xs) => Ok(xs.iter().map(|x| model.eulerian_constraint(x)).collect()),
        States::Potential(xs) => Ok(xs.iter().map(|x| model.potential_constraint(x)).collect()),
        States::Lagrangian(_) => Err(Error::Trajectory("constraint residuals need an Eulerian or potential trajectory".into())),
    }
}

/// (q•, 0, z•) with q• = −B div s•.
pub fn eulerian_special<T: Real>(model: &Model<'_, T>) -> Result<EulerianState<T>> {
    let eq = model.special();
    Ok(EulerianState {
        p: divergence(model.space(), &eq.s_bullet)?.scale(-model.coeffs().bulk),
        vvec: VectorField::zeros(model.space()),
        v: eq.z_bullet.clone(),
        v_t: SurfaceField::zeros(model.space().l_max()),
        t: 0.0,
    })
}

/// Splits an Eulerian state as (constrained part) + λ(q•, 0, z•); returns both.
pub fn decompose_eulerian<T: Real>(model: &Model<'_, T>, x: &EulerianState<T>) -> Result<(EulerianState<T>, T)> {
    let special = eulerian_special(model)?;
    let lambda = model.eulerian_constraint(x) / model.eulerian_constraint(&special);
    let constrained = EulerianState {
        p: &x.p - &special.p.scale(lambda),
        vvec: x.vvec.clone(),
        v: &x.v - &special.v.scale(lambda),
        v_t: x.v_t.clone(),
        t: x.t,
    };
    Ok((constrained, lambda))
}

/// Outcome of comparing two trajectories modulo stationary solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryReport {
    /// max_t of the largest coefficient of d(t) − d(0).
    pub time_variation: f64,
    /// Residual of d(0) as a stationary solution of the model.
    pub stationary_residual: f64,
    /// Largest coefficient of d(0).
    pub difference: f64,
    /// Largest coefficient of the first trajectory, for relative tolerances.
    pub scale: f64,
}

impl StationaryReport {
    pub fn equivalent(&self, tol: f64) -> bool {
        let s = self.scale.max(1.0);
        self.time_variation <= tol * s && self.stationary_residual <= tol * s
    }
}

fn lagrangian_diff<T: Real>(a: &LagrangianState<T>, b: &LagrangianState<T>) -> LagrangianState<T> {
    LagrangianState { r: &a.r - &b.r, v: &a.v - &b.v, r_t: &a.r_t - &b.r_t, v_t: &a.v_t - &b.v_t, t: a.t }
}

fn eulerian_diff<T: Real>(a: &EulerianState<T>, b: &EulerianState<T>) -> EulerianState<T> {
    EulerianState { p: &a.p - &b.p, vvec: &a.vvec - &b.vvec, v: &a.v - &b.v, v_t: &a.v_t - &b.v_t, t: a.t }
}

fn potential_diff<T: Real>(a: &PotentialState<T>, b: &PotentialState<T>) -> PotentialState<T> {
    PotentialState { u: &a.u - &b.u, v: &a.v - &b.v, u_t: &a.u_t - &b.u_t, v_t: &a.v_t - &b.v_t, t: a.t }
}

/// d(t) = A(t) − B(t): time variation of d and whether d(0) is stationary.
pub fn stationary_difference<T: Real>(model: &Model<'_, T>, a: &Trajectory<T>, b: &Trajectory<T>) -> Result<StationaryReport> {
    let (ta, tb) = (a.times(), b.times());
    if ta.len() != tb.len() || ta.iter().zip(&tb).any(|(x, y)| (x - y).abs() > 1e-9 * a.dt.max(f64::MIN_POSITIVE)) {
        return Err(Error::Trajectory("trajectories are on different time grids".into()));
    }
    if std::mem::discriminant(&a.states) != std::mem::discriminant(&b.states) {
        return Err(Error::Trajectory(format!("cannot compare {} with {}", a.tag, b.tag)));
    }
    let space = model.space();
    let c = model.coeffs();
    let f = |x: T| x.as_f64();
    let mut report = StationaryReport { time_variation: 0.0, stationary_residual: 0.0, difference: 0.0, scale: 0.0 };
    match (&a.states, &b.states) {
        (States::Lagrangian(xa), States::Lagrangian(xb)) => {
            let d: Vec<_> = xa.iter().zip(xb).map(|(p, q)| lagrangian_diff(p, q)).collect();
            if let Some(d0) = d.first() {
                for di in &d {
                    report.time_variation = report.time_variation.max(f(lagrangian_diff(di, d0).max_abs()));
                }
                let (_, res) = equilibrium_residual(space, &d0.configuration(), c.bulk, model.generator().membrane())?;
                report.stationary_residual = f(res).max(f(d0.r_t.max_abs())).max(f(d0.v_t.max_abs()));
                report.difference = f(d0.max_abs());
            }
            report.scale = xa.iter().map(|x| f(x.max_abs())).fold(0.0, f64::max);
        }
        (States::Eulerian(xa), States::Eulerian(xb)) => {
            let d: Vec<_> = xa.iter().zip(xb).map(|(p, q)| eulerian_diff(p, q)).collect();
            if let Some(d0) = d.first() {
                for di in &d {
                    report.time_variation = report.time_variation.max(f(eulerian_diff(di, d0).max_abs()));
                }
                // Stationary: p ≡ p0, 𝐯 = 0, v_t = 0, −Div(σ∇v) + κv + p0 = 0.
                let p0 = d0.p.mean(space);
                let dev = (&d0.p - &ScalarBulkField::constant(space, p0)).norm_l2(space);
                let b = space.outer_radius();
                let res = model.generator().membrane().weak_residual_vector(&d0.v, p0);
                report.stationary_residual =
                    f(dev).max(f(res / (b * b))).max(f(d0.vvec.max_abs())).max(f(d0.v_t.max_abs()));
                report.difference = f(d0.max_abs());
            }
            report.scale = xa.iter().map(|x| f(x.max_abs())).fold(0.0, f64::max);
        }
        (States::Potential(xa), States::Potential(xb)) => {
            let d: Vec<_> = xa.iter().zip(xb).map(|(p, q)| potential_diff(p, q)).collect();
            if let Some(d0) = d.first() {
                for di in &d {
                    report.time_variation = report.time_variation.max(f(potential_diff(di, d0).max_abs()));
                }
                // Stationary: u constant, u_t = 0, v_t = 0, −Div(σ∇v) + κv = 0.
                let res = model.generator().membrane().weak_residual_vector(&d0.v, T::zero());
                let b = space.outer_radius();
                report.stationary_residual = f(d0.u.gradient_norm(space))
                    .max(f(d0.u_t.max_abs()))
                    .max(f(d0.v_t.max_abs()))
                    .max(f(res / (b * b)));
                report.difference = f(d0.max_abs());
            }
            report.scale = xa.iter().map(|x| f(x.max_abs())).fold(0.0, f64::max);
        }
        _ => unreachable!("discriminants checked above"),
    }
    Ok(report)
}
