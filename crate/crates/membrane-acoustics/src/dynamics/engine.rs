//! Galerkin semi-discretization of the potential model and its implicit
//! midpoint integrator.
//!
//! Per harmonic the unknowns are the radial nodal profiles of u and u_t = a
//! and the surface coefficients of v and v_t = w:
//!
//!   M_u a_t = −S u + C w,        M_v w_t = −K v − D w − Cᵀ a,
//!
//! with M_u = (ρ0²/B) diag(W), S = ρ0 S_l, C = ρ0 b² e_b (the boundary row),
//! M_v = ∫_{Γ1} μ Y Y, D = ∫_{Γ1} δ Y Y and K the membrane matrix. The bulk
//! blocks are diagonal in (l, m); variable boundary coefficients couple
//! modes through M_v, D and K only.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use super::state::PotentialState;
use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::membrane::{surface_mass, MembraneOperator};
use crate::real::Real;
use crate::spectral::{degree_order, DiscreteSpace, SurfaceField};

/// The assembled semi-discrete operator.
pub struct Generator<'a, T: Real> {
    space: &'a DiscreteSpace<T>,
    coeffs: Coefficients<T>,
    membrane: MembraneOperator<T>,
    mass_v: DMatrix<T>,
    mass_v_chol: Cholesky<T, Dyn>,
    damping: DMatrix<T>,
    stiffness: Vec<DMatrix<T>>,
    mass_u: Vec<T>,
    coupling: T,
    constant: bool,
}

impl<T: Real> std::fmt::Debug for Generator<'_, T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Generator")
            .field("l_max", &self.space.l_max())
            .field("n_r", &self.space.n_r())
            .field("constant", &self.constant)
            .finish()
    }
}

pub fn assemble_generator<'a, T: Real>(
    space: &'a DiscreteSpace<T>,
    coeffs: &Coefficients<T>,
) -> Result<Generator<'a, T>> {
    coeffs.validate(space)?;
    let membrane = coeffs.membrane(space)?;
    let mass_v = surface_mass(space, &coeffs.mu)?;
    let mass_v_chol =
        Cholesky::new(mass_v.clone()).ok_or_else(|| Error::Singular("membrane mass matrix".into()))?;
    let damping = surface_mass(space, &coeffs.delta)?;
    let rho0 = coeffs.rho0;
    let stiffness = (0..=space.l_max()).map(|l| space.stiffness(l) * rho0).collect();
    let mass_u = space.radial_weights().iter().map(|&w| rho0 * rho0 / coeffs.bulk * w).collect();
    let b = space.outer_radius();
    Ok(Generator {
        space,
        coeffs: coeffs.clone(),
        membrane,
        mass_v,
        mass_v_chol,
        damping,
        stiffness,
        mass_u,
        coupling: rho0 * b * b,
        constant: coeffs.is_constant(),
    })
}

fn col<T: Real>(f: &SurfaceField<T>) -> DVector<T> {
    DVector::from_column_slice(f.coeffs())
}

fn quad<T: Real>(m: &DMatrix<T>, x: &DVector<T>, y: &DVector<T>) -> T {
    x.dot(&(m * y))
}

impl<'a, T: Real> Generator<'a, T> {
    pub fn space(&self) -> &'a DiscreteSpace<T> {
        self.space
    }

    pub fn coeffs(&self) -> &Coefficients<T> {
        &self.coeffs
    }

    pub fn membrane(&self) -> &MembraneOperator<T> {
        &self.membrane
    }

    /// ∫_{Γ1} μ Y_i Y_j dA.
    pub fn mass_v(&self) -> &DMatrix<T> {
        &self.mass_v
    }

    /// ∫_{Γ1} δ Y_i Y_j dA.
    pub fn damping(&self) -> &DMatrix<T> {
        &self.damping
    }

    /// ρ0 times the radial stiffness of degree l.
    pub fn bulk_stiffness(&self, l: usize) -> &DMatrix<T> {
        &self.stiffness[l]
    }

    /// Diagonal of the bulk mass, (ρ0²/B) W_j.
    pub fn bulk_mass(&self) -> &[T] {
        &self.mass_u
    }

    /// ρ0 b², the weight of the boundary row in the coupling.
    pub fn coupling(&self) -> T {
        self.coupling
    }

    /// Whether the operator is block-diagonal over (l, m).
    pub fn is_mode_diagonal(&self) -> bool {
        self.constant
    }

    /// Discrete energy ½(uᵀSu + aᵀM_u a + vᵀKv + wᵀM_v w).
    pub fn energy(&self, x: &PotentialState<T>) -> T {
        self.energy_inner(x, x) * T::lit(0.5)
    }

    /// The symmetric bilinear form whose quadratic form is twice the energy.
    pub fn energy_inner(&self, x: &PotentialState<T>, y: &PotentialState<T>) -> T {
        let mut s = T::zero();
        for idx in 0..self.space.n_modes() {
            let (l, _) = degree_order(idx);
            s += x.u.mode_view(idx).dot(&(&self.stiffness[l] * y.u.mode_view(idx)));
            let (xa, ya) = (x.u_t.mode(idx), y.u_t.mode(idx));
            s += (0..xa.len()).fold(T::zero(), |acc, j| acc + self.mass_u[j] * xa[j] * ya[j]);
        }
        s + quad(self.membrane.matrix(), &col(&x.v), &col(&y.v)) + quad(&self.mass_v, &col(&x.v_t), &col(&y.v_t))
    }

    /// ∫_{Γ1} δ w².
    pub fn dissipation_rate(&self, w: &SurfaceField<T>) -> T {
        let w = col(w);
        quad(&self.damping, &w, &w)
    }

    /// The time derivative (u_t, v_t, u_tt, v_tt) of a state.
    pub fn apply(&self, x: &PotentialState<T>) -> PotentialState<T> {
        let rad = self.space.radial();
        let mut out = PotentialState::zeros(self.space);
        out.t = x.t;
        out.u = x.u_t.clone();
        out.v = x.v_t.clone();
        let mut cta = DVector::zeros(self.space.n_modes());
        for idx in 0..self.space.n_modes() {
            let (l, _) = degree_order(idx);
            let mut rhs = -(&self.stiffness[l] * x.u.mode_view(idx));
            rhs.axpy(self.coupling * x.v_t.coeffs()[idx], rad.value_at_b(), T::one());
            for (j, r) in rhs.iter_mut().enumerate() {
                *r /= self.mass_u[j];
            }
            out.u_t.set_mode(idx, &rhs);
            cta[idx] = self.coupling * rad.value_at_b().dot(&x.u_t.mode_view(idx));
        }
        let rhs = -(self.membrane.matrix() * col(&x.v)) - &self.damping * col(&x.v_t) - cta;
        out.v_t = SurfaceField::from_coeffs(self.space.l_max(), self.mass_v_chol.solve(&rhs).as_slice().to_vec())
            .expect("shape");
        out
    }

    /// ρ0∫_Ω u_t − B∫_{Γ1} v, the quantity fixed to zero by the constrained model.
    pub fn constraint(&self, x: &PotentialState<T>) -> T {
        self.coeffs.rho0 * x.u_t.integrate(self.space) - self.coeffs.bulk * x.v.integrate(self.space.outer_radius())
    }
}

/// Outcome of one midpoint step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport<T> {
    /// dt·∫_{Γ1} δ |v_t^{n+½}|².
    pub dissipation: T,
    /// Relative residual of the implicit equations after the solve.
    pub residual: T,
}

/// Implicit midpoint rule for a fixed step, with the bulk eliminated onto the
/// boundary unknowns.
pub struct Midpoint<'g, 'a, T: Real> {
    gen: &'g Generator<'a, T>,
    dt: T,
    bulk: Vec<Cholesky<T, Dyn>>,
    /// (2M_u + dt²/2 S)⁻¹ e_b per degree.
    lift: Vec<DVector<T>>,
    schur: LU<T, Dyn, Dyn>,
    boundary: DMatrix<T>,
}

impl<'g, 'a, T: Real> Midpoint<'g, 'a, T> {
    pub fn new(gen: &'g Generator<'a, T>, dt: T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.as_f64().is_finite() {
            return Err(Error::Trajectory(format!("time step must be positive, got {dt:.3e}")));
        }
        let space = gen.space;
        let two = T::lit(2.0);
        let half_dt2 = dt * dt * T::lit(0.5);
        let eb = space.radial().value_at_b();
        let mut bulk = Vec::with_capacity(space.l_max() + 1);
        let mut lift = Vec::with_capacity(space.l_max() + 1);
        for l in 0..=space.l_max() {
            let mut a = &gen.stiffness[l] * half_dt2;
            for (j, &m) in gen.mass_u.iter().enumerate() {
                a[(j, j)] += two * m;
            }
            let chol = Cholesky::new(a)
                .ok_or_else(|| Error::Singular(format!("bulk midpoint block for l = {l} (dt = {dt:.3e})")))?;
            lift.push(chol.solve(eb));
            bulk.push(chol);
        }
        let boundary = &gen.mass_v * two + gen.membrane.matrix() * half_dt2 + &gen.damping * dt;
        let c2 = gen.coupling * gen.coupling;
        let mut schur = boundary.clone();
        for idx in 0..space.n_modes() {
            let (l, _) = degree_order(idx);
            schur[(idx, idx)] += dt * dt * c2 * eb.dot(&lift[l]);
        }
        let schur = LU::new(schur);
        if !schur.is_invertible() {
            return Err(Error::Singular(format!("boundary Schur complement is singular at dt = {dt:.3e}")));
        }
        Ok(Self { gen, dt, bulk, lift, schur, boundary })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn generator(&self) -> &'g Generator<'a, T> {
        self.gen
    }

    /// Advances the state by one step in place.
    pub fn step(&self, x: &mut PotentialState<T>) -> Result<StepReport<T>> {
        let gen = self.gen;
        let space = gen.space;
        let n_modes = space.n_modes();
        let dt = self.dt;
        let two = T::lit(2.0);
        let eb = space.radial().value_at_b();
        let c = gen.coupling;

        // Bulk right-hand sides r_u = 2M_u a − dt S u and A_u⁻¹ r_u.
        let mut r_u = Vec::with_capacity(n_modes);
        let mut sol_u = Vec::with_capacity(n_modes);
        let mut g = DVector::zeros(n_modes);
        for idx in 0..n_modes {
            let (l, _) = degree_order(idx);
            let mut r = -(&gen.stiffness[l] * x.u.mode_view(idx)) * dt;
            for (j, (rj, &aj)) in r.iter_mut().zip(x.u_t.mode(idx)).enumerate() {
                *rj += two * gen.mass_u[j] * aj;
            }
            let s = self.bulk[l].solve(&r);
            g[idx] = eb.dot(&s);
            r_u.push(r);
            sol_u.push(s);
        }

        let v = col(&x.v);
        let w = col(&x.v_t);
        let r_v = &gen.mass_v * &w * two - gen.membrane.matrix() * &v * dt;
        let rhs = &r_v - &g * (dt * c);
        let w_bar = self.schur.solve(&rhs).ok_or_else(|| Error::Singular("boundary Schur solve".into()))?;

        // ā = A_u⁻¹ r_u + dt c w̄ A_u⁻¹ e_b, and the residuals of both block equations.
        let mut a_bar = Vec::with_capacity(n_modes);
        let mut ct_a = DVector::zeros(n_modes);
        let mut res_sq = T::zero();
        let mut ref_sq = T::zero();
        for idx in 0..n_modes {
            let (l, _) = degree_order(idx);
            let mut ab = sol_u[idx].clone();
            ab.axpy(dt * c * w_bar[idx], &self.lift[l], T::one());
            let mut lhs = &gen.stiffness[l] * &ab * (dt * dt * T::lit(0.5));
            for (j, y) in lhs.iter_mut().enumerate() {
                *y += two * gen.mass_u[j] * ab[j];
            }
            let mut rr = &r_u[idx] + eb * (dt * c * w_bar[idx]);
            ref_sq += rr.norm_squared();
            rr -= lhs;
            res_sq += rr.norm_squared();
            ct_a[idx] = c * eb.dot(&ab);
            a_bar.push(ab);
        }
        let rv = &self.boundary * &w_bar + &ct_a * dt - &r_v;
        ref_sq += r_v.norm_squared();
        res_sq += rv.norm_squared();

        let dissipation = dt * quad(&gen.damping, &w_bar, &w_bar);
        for (idx, ab) in a_bar.iter().enumerate() {
            for (j, (u, a)) in x.u.mode_mut(idx).iter_mut().zip(x.u_t.mode_mut(idx).iter_mut()).enumerate() {
                *u += dt * ab[j];
                *a = two * ab[j] - *a;
            }
        }
        for (idx, (vv, ww)) in x.v.coeffs_mut().iter_mut().zip(x.v_t.coeffs_mut().iter_mut()).enumerate() {
            *vv += dt * w_bar[idx];
            *ww = two * w_bar[idx] - *ww;
        }
        x.t += dt.as_f64();
        let residual = if ref_sq > T::zero() { (res_sq / ref_sq).sqrt() } else { T::zero() };
        Ok(StepReport { dissipation, residual })
    }
}

/// One implicit midpoint step of size dt.
pub fn step_midpoint<T: Real>(gen: &Generator<'_, T>, state: &PotentialState<T>, dt: T) -> Result<PotentialState<T>> {
    let stepper = Midpoint::new(gen, dt)?;
    let mut next = state.clone();
    stepper.step(&mut next)?;
    Ok(next)
}
