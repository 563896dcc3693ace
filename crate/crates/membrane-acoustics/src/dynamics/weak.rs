//! Space–time residuals of the weak formulations against separable test
//! functions χ(t)·Φ(x), with χ a C^∞ bump and the time integral taken by the
//! trapezoid rule over the output times.

use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::simulate::{Model, Trajectory};
use super::state::{EulerianState, LagrangianState, PotentialState};
use crate::bulk::{divergence, ScalarBulkField, ToroidalField, VectorField};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::sampling;
use crate::spectral::{Boundary, DiscreteSpace, SurfaceField};

/// Result of a weak-residual check.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakReport {
    /// |residual| / scale per test function (and per identity for the
    /// two-equation systems).
    pub relative: Vec<f64>,
    /// Scale (sum of the absolute values of all integrated terms) per entry.
    pub scales: Vec<f64>,
}

impl WeakReport {
    pub fn max_relative(&self) -> f64 {
        self.relative.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_scale(&self) -> f64 {
        self.scales.iter().copied().fold(0.0, f64::max)
    }
}

/// exp(−1/(1 − s²)) on (t_a, t_b) with its time derivative.
#[derive(Debug, Clone, Copy)]
struct Bump {
    ta: f64,
    tb: f64,
}

impl Bump {
    fn eval(&self, t: f64) -> (f64, f64) {
        let half = 0.5 * (self.tb - self.ta);
        let s = (t - 0.5 * (self.ta + self.tb)) / half;
        if s.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let q = 1.0 - s * s;
        let chi = (-1.0 / q).exp();
        (chi, chi * (-2.0 * s / (q * q)) / half)
    }
}

fn random_bump<R: Rng>(rng: &mut R, t0: f64, t1: f64) -> Bump {
    let len = t1 - t0;
    let width = len * rng.random_range(0.6..1.0);
    let start = t0 + (len - width) * rng.random_range(0.0..1.0);
    Bump { ta: start, tb: start + width }
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let h = 0.5 * (times[k + 1] - times[k]);
        w[k] += h;
        w[k + 1] += h;
    }
    w
}

/// Band limit of the spatial test fields.
const TEST_L: usize = 4;

fn band_limit<T: Real>(space: &DiscreteSpace<T>, mut coeffs: Vec<T>) -> Vec<T> {
    for (idx, c) in coeffs.iter_mut().enumerate() {
        if space.index().degree_order(idx).0 > TEST_L {
            *c = T::zero();
        }
    }
    coeffs
}

fn test_scalar<T: Real, R: Rng>(space: &DiscreteSpace<T>, rng: &mut R) -> ScalarBulkField<T> {
    let mut f = sampling::scalar(space, rng);
    for idx in 0..space.n_modes() {
        if space.index().degree_order(idx).0 > TEST_L {
            f.mode_mut(idx).iter_mut().for_each(|x| *x = T::zero());
        }
    }
    f
}

/// Φ = ∇φ + toroidal part, with Φ·ν = 0 on Γ0; returns Φ and ψ = −Φ·ν on Γ1.
fn test_vector<T: Real, R: Rng>(space: &DiscreteSpace<T>, rng: &mut R) -> (VectorField<T>, SurfaceField<T>) {
    let phi = test_scalar(space, rng);
    let grad = VectorField::gradient(space, &phi);
    let tor = band_limit_toroidal(space, &sampling::toroidal(space, rng));
    let field = VectorField::from_parts(
        space,
        grad.potential().clone(),
        SurfaceField::zeros(space.l_max()),
        grad.trace_outer().clone(),
        tor,
    )
    .expect("shape");
    let psi = grad.trace_outer().scale(-T::one());
    (field, psi)
}

fn band_limit_toroidal<T: Real>(space: &DiscreteSpace<T>, t: &ToroidalField<T>) -> ToroidalField<T> {
    let n = space.n_r();
    let mut data = t.data().to_vec();
    for idx in 0..space.n_modes() {
        if space.index().degree_order(idx).0 > TEST_L {
            data[idx * n..(idx + 1) * n].iter_mut().for_each(|x| *x = T::zero());
        }
    }
    ToroidalField::from_data(space.l_max(), n, data).expect("shape")
}

fn test_surface<T: Real, R: Rng>(space: &DiscreteSpace<T>, rng: &mut R) -> SurfaceField<T> {
    let s = sampling::surface(space, rng);
    SurfaceField::from_coeffs(space.l_max(), band_limit(space, s.into_coeffs())).expect("shape")
}

fn col<T: Real>(f: &SurfaceField<T>) -> DVector<T> {
    DVector::from_column_slice(f.coeffs())
}

/// Accumulates Σ_k w_k (χ'(t_k)·A_k + χ(t_k)·B_k) for term lists A_k, B_k.
struct Accumulator {
    sum: f64,
    scale: f64,
}

impl Accumulator {
    fn new() -> Self {
        Self { sum: 0.0, scale: 0.0 }
    }

    fn add(&mut self, weight: f64, factor: f64, terms: &[f64]) {
        for &t in terms {
            self.sum += weight * factor * t;
            self.scale += (weight * factor * t).abs();
        }
    }

    fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.sum.abs() / self.scale
        } else {
            0.0
        }
    }
}

/// Residual against n_tests random test functions drawn from `seed`.
pub fn weak_residual<T: Real>(model: &Model<'_, T>, traj: &Trajectory<T>, n_tests: usize, seed: u64) -> Result<WeakReport> {
    let times = traj.times();
    if times.len() < 3 {
        return Err(Error::Trajectory("weak residual needs at least three output times".into()));
    }
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let weights = trapezoid_weights(&times);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut report = WeakReport { relative: Vec::new(), scales: Vec::new() };
    let mut push = |acc: &Accumulator| {
        report.relative.push(acc.relative());
        report.scales.push(acc.scale);
    };
    for _ in 0..n_tests {
        let bump = random_bump(&mut rng, t0, t1);
        if let Some(states) = traj.states.lagrangian() {
            let tests = LagrangianTest::new(model, &mut rng);
            let mut acc = Accumulator::new();
            for (x, (&w, &t)) in states.iter().zip(weights.iter().zip(&times)) {
                let (chi, dchi) = bump.eval(t);
                let (a, b) = tests.terms(model, x)?;
                acc.add(w, dchi, &a);
                acc.add(w, chi, &b);
            }
            push(&acc);
        } else if let Some(states) = traj.states.eulerian() {
            let tests = EulerianTest::new(model, &mut rng);
            let mut mass = Accumulator::new();
            let mut momentum = Accumulator::new();
            for (x, (&w, &t)) in states.iter().zip(weights.iter().zip(&times)) {
                let (chi, dchi) = bump.eval(t);
                let [a1, b1, a2, b2] = tests.terms(model, x)?;
                mass.add(w, dchi, &a1);
                mass.add(w, chi, &b1);
                momentum.add(w, dchi, &a2);
                momentum.add(w, chi, &b2);
            }
            push(&mass);
            push(&momentum);
        } else if let Some(states) = traj.states.potential() {
            let tests = PotentialTest::new(model, &mut rng);
            let mut bulk = Accumulator::new();
            let mut membrane = Accumulator::new();
            for (x, (&w, &t)) in states.iter().zip(weights.iter().zip(&times)) {
                let (chi, dchi) = bump.eval(t);
                let [a1, b1, a2, b2] = tests.terms(model, x);
                bulk.add(w, dchi, &a1);
                bulk.add(w, chi, &b1);
                membrane.add(w, dchi, &a2);
                membrane.add(w, chi, &b2);
            }
            push(&bulk);
            push(&membrane);
        }
    }
    Ok(report)
}

/// Membrane pairings (σ∇v, ∇ψ) + (κv, ψ), (δv_t, ψ) and (μv_t, ψ).
fn membrane_terms<T: Real>(model: &Model<'_, T>, psi: &DVector<T>, v: &SurfaceField<T>, v_t: &SurfaceField<T>) -> [f64; 3] {
    let g = model.generator();
    let (v, w) = (col(v), col(v_t));
    [
        psi.dot(&(g.membrane().matrix() * &v)).as_f64(),
        psi.dot(&(g.damping() * &w)).as_f64(),
        psi.dot(&(g.mass_v() * &w)).as_f64(),
    ]
}

struct LagrangianTest<T: Real> {
    phi: VectorField<T>,
    div_phi: ScalarBulkField<T>,
    psi: DVector<T>,
}

impl<T: Real> LagrangianTest<T> {
    fn new<R: Rng>(model: &Model<'_, T>, rng: &mut R) -> Self {
        let space = model.space();
        let (phi, psi) = test_vector(space, rng);
        let div_phi = divergence(space, &phi).expect("shape");
        Self { phi, div_phi, psi: col(&psi) }
    }

    /// (χ' terms, χ terms) of
    /// ∫ρ0 r_t·Φ_t − B div r div Φ + ∫_{Γ1} μv_tψ_t − σ∇v·∇ψ − (δv_t + κv)ψ.
    fn terms(&self, model: &Model<'_, T>, x: &LagrangianState<T>) -> Result<([f64; 2], [f64; 3])> {
        let space = model.space();
        let c = model.coeffs();
        let kin = (c.rho0 * x.r_t.dot_l2(space, &self.phi)).as_f64();
        let div = divergence(space, &x.r)?;
        let pot = (c.bulk * div.dot_l2(space, &self.div_phi)).as_f64();
        let [kv, dw, mw] = membrane_terms(model, &self.psi, &x.v, &x.v_t);
        Ok(([kin, mw], [-pot, -kv, -dw]))
    }
}

struct EulerianTest<T: Real> {
    scalar: ScalarBulkField<T>,
    grad: VectorField<T>,
    scalar_b: SurfaceField<T>,
    phi: VectorField<T>,
    div_phi: ScalarBulkField<T>,
    psi: DVector<T>,
}

impl<T: Real> EulerianTest<T> {
    fn new<R: Rng>(model: &Model<'_, T>, rng: &mut R) -> Self {
        let space = model.space();
        let scalar = test_scalar(space, rng);
        let grad = VectorField::gradient(space, &scalar);
        let scalar_b = scalar.boundary_value(space, Boundary::Gamma1).expect("Γ1 exists");
        let (phi, psi) = test_vector(space, rng);
        let div_phi = divergence(space, &phi).expect("shape");
        Self { scalar, grad, scalar_b, phi, div_phi, psi: col(&psi) }
    }

    /// Terms of ∫ p φ_t + B𝐯·∇φ + B∫_{Γ1} v_tφ and of
    /// ∫ρ0𝐯·Φ_t + p div Φ + ∫_{Γ1} μv_tψ_t − σ∇v·∇ψ − (δv_t + κv)ψ.
    fn terms(&self, model: &Model<'_, T>, x: &EulerianState<T>) -> Result<[Vec<f64>; 4]> {
        let space = model.space();
        let c = model.coeffs();
        let b = space.outer_radius();
        let p_phi = x.p.dot_l2(space, &self.scalar).as_f64();
        let flux = (c.bulk * x.vvec.dot_l2(space, &self.grad)).as_f64();
        let wall = (c.bulk * b * b * x.v_t.dot(&self.scalar_b)).as_f64();
        let kin = (c.rho0 * x.vvec.dot_l2(space, &self.phi)).as_f64();
        let press = x.p.dot_l2(space, &self.div_phi).as_f64();
        let [kv, dw, mw] = membrane_terms(model, &self.psi, &x.v, &x.v_t);
        Ok([vec![p_phi], vec![flux, wall], vec![kin, mw], vec![press, -kv, -dw]])
    }
}

struct PotentialTest<T: Real> {
    scalar: ScalarBulkField<T>,
    scalar_b: SurfaceField<T>,
    psi: SurfaceField<T>,
}

impl<T: Real> PotentialTest<T> {
    fn new<R: Rng>(model: &Model<'_, T>, rng: &mut R) -> Self {
        let space = model.space();
        let scalar = test_scalar(space, rng);
        let scalar_b = scalar.boundary_value(space, Boundary::Gamma1).expect("Γ1 exists");
        Self { scalar, scalar_b, psi: test_surface(space, rng) }
    }

    /// Terms of ∫ −ρ0u_tφ_t + B∇u·∇φ − B∫_{Γ1} v_tφ and of
    /// ∫_{Γ1} −μv_tψ_t + σ∇v·∇ψ + (δv_t + κv)ψ − ρ0uψ_t.
    fn terms(&self, model: &Model<'_, T>, x: &PotentialState<T>) -> [Vec<f64>; 4] {
        let space = model.space();
        let c = model.coeffs();
        let b = space.outer_radius();
        let ut_phi = (-c.rho0 * x.u_t.dot_l2(space, &self.scalar)).as_f64();
        let grad = (c.bulk * x.u.dot_gradient(space, &self.scalar)).as_f64();
        let wall = (-c.bulk * b * b * x.v_t.dot(&self.scalar_b)).as_f64();
        let psi = col(&self.psi);
        let [kv, dw, mw] = membrane_terms(model, &psi, &x.v, &x.v_t);
        let ub = x.u.boundary_value(space, Boundary::Gamma1).expect("Γ1 exists");
        let u_psi = (-c.rho0 * b * b * ub.dot(&self.psi)).as_f64();
        [vec![ut_phi], vec![grad, wall], vec![-mw, u_psi], vec![kv, dw]]
    }
}
