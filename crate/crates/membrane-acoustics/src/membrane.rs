//! The membrane operator v ↦ −Div_Γ(σ∇_Γ v) + κv on Γ1 and its solver.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::{degree_order, DiscreteSpace, SurfaceField};

/// Galerkin matrix K_ij = ∫_{Γ1} σ ∇_ΓY_i·∇_ΓY_j + κ Y_i Y_j dA.
///
/// The Γ1 mass matrix is b²·I, so the strong operator is K / b².
pub struct MembraneOperator<T: Real> {
    matrix: DMatrix<T>,
    b: T,
    sigma_min: T,
    kappa_min: T,
    kappa_zero: bool,
    chol: Option<Cholesky<T, Dyn>>,
}

impl<T: Real> std::fmt::Debug for MembraneOperator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MembraneOperator")
            .field("size", &self.matrix.nrows())
            .field("sigma_min", &self.sigma_min)
            .field("kappa_min", &self.kappa_min)
            .field("kappa_zero", &self.kappa_zero)
            .finish()
    }
}

/// Minimum of a coefficient over the surface quadrature nodes.
pub fn node_minimum<T: Real>(space: &DiscreteSpace<T>, c: &SurfaceField<T>) -> T {
    c.values(space).into_iter().fold(T::max_value().unwrap_or_else(T::one), |m, v| m.min(v))
}

/// Whether a coefficient vanishes identically (up to round-off in its coefficients).
pub fn is_identically_zero<T: Real>(c: &SurfaceField<T>) -> bool {
    c.max_abs() <= T::lit(16.0 * T::EPS)
}

/// Weighted surface mass ∫_{Γ1} c Y_i Y_j dA = b² ∫ c Y_i Y_j dΩ.
pub fn surface_mass<T: Real>(space: &DiscreteSpace<T>, c: &SurfaceField<T>) -> Result<DMatrix<T>> {
    space.expect_l_max(c.l_max(), "surface coefficient")?;
    let b = space.outer_radius();
    let m = space.sphere().weighted_gram(&c.values(space)) * (b * b);
    Ok(symmetrize(m))
}

fn symmetrize<T: Real>(m: DMatrix<T>) -> DMatrix<T> {
    (&m + m.transpose()) * T::lit(0.5)
}

pub fn assemble_membrane<T: Real>(
    space: &DiscreteSpace<T>,
    sigma: &SurfaceField<T>,
    kappa: &SurfaceField<T>,
) -> Result<MembraneOperator<T>> {
    space.expect_l_max(sigma.l_max(), "σ")?;
    space.expect_l_max(kappa.l_max(), "κ")?;
    let b = space.outer_radius();
    let sigma_vals = sigma.values(space);
    let kappa_vals = kappa.values(space);
    let sigma_min = sigma_vals.iter().fold(T::max_value().unwrap_or_else(T::one), |m, &v| m.min(v));
    let kappa_min = kappa_vals.iter().fold(T::max_value().unwrap_or_else(T::one), |m, &v| m.min(v));
    if !(sigma_min > T::zero()) {
        return Err(Error::Coefficient(format!("min σ > 0 required, found {sigma_min:.3e} at a quadrature node")));
    }
    let kappa_zero = is_identically_zero(kappa);
    let kappa_floor = -T::lit(64.0 * T::EPS) * kappa.max_abs();
    if kappa_min < kappa_floor {
        return Err(Error::Coefficient(format!("κ ≥ 0 required, found {kappa_min:.3e} at a quadrature node")));
    }
    let g = space.sphere();
    let stiff = g.weighted_gradient_gram(&sigma_vals);
    let matrix = if kappa_zero { symmetrize(stiff) } else { symmetrize(stiff + g.weighted_gram(&kappa_vals) * (b * b)) };
    let chol = if kappa_zero {
        None
    } else {
        Some(
            Cholesky::new(matrix.clone())
                .ok_or_else(|| Error::Singular("membrane operator is not positive definite".into()))?,
        )
    };
    Ok(MembraneOperator { matrix, b, sigma_min, kappa_min, kappa_zero, chol })
}

impl<T: Real> MembraneOperator<T> {
    /// The weak (Galerkin) matrix.
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn sigma_min(&self) -> T {
        self.sigma_min
    }

    pub fn kappa_min(&self) -> T {
        self.kappa_min
    }

    pub fn kappa_zero(&self) -> bool {
        self.kappa_zero
    }

    pub fn l_max(&self) -> usize {
        (self.matrix.nrows() as f64).sqrt().round() as usize - 1
    }

    /// Weak action ∫ σ∇z·∇Y_i + κ z Y_i for every test harmonic.
    pub fn weak_apply(&self, z: &SurfaceField<T>) -> DVector<T> {
        &self.matrix * DVector::from_column_slice(z.coeffs())
    }

    /// Strong action −Div_Γ(σ∇_Γ z) + κz, as a surface field.
    pub fn apply(&self, z: &SurfaceField<T>) -> SurfaceField<T> {
        let k = self.weak_apply(z) / (self.b * self.b);
        SurfaceField::from_coeffs(z.l_max(), k.as_slice().to_vec()).expect("shape")
    }

    /// ∫σ∇z·∇ψ + ∫κzψ + p0∫ψ for a test field ψ.
    pub fn weak_residual(&self, z: &SurfaceField<T>, p0: T, psi: &SurfaceField<T>) -> T {
        let kz = self.weak_apply(z);
        let psi_v = DVector::from_column_slice(psi.coeffs());
        kz.dot(&psi_v) + p0 * psi.integrate(self.b)
    }

    /// ‖weak residual of −Div_Γ(σ∇_Γz) + κz + p0‖ over all test harmonics.
    pub fn weak_residual_vector(&self, z: &SurfaceField<T>, p0: T) -> T {
        let mut r = self.weak_apply(z);
        r[0] += p0 * self.b * self.b * (T::lit(4.0) * T::pi()).sqrt();
        r.norm()
    }

    /// Energy form ∫σ|∇z|² + κ|z|².
    pub fn energy(&self, z: &SurfaceField<T>) -> T {
        let zv = DVector::from_column_slice(z.coeffs());
        zv.dot(&(&self.matrix * &zv))
    }
}

/// Weak solution of −Div_Γ(σ∇_Γ z) + κz + p0 = 0 on Γ1.
///
/// For κ ≡ 0 the problem is solvable only when p0 = 0, and the kernel
/// representative 𝟙_{Γ1} is returned.
pub fn solve_surface_equilibrium<T: Real>(op: &MembraneOperator<T>, p0: T) -> Result<SurfaceField<T>> {
    let l_max = op.l_max();
    if op.kappa_zero {
        if p0 != T::zero() {
            return Err(Error::NoSolution(format!(
                "κ ≡ 0: the surface equilibrium equation has weak solutions only for p0 = 0 (got {p0:.3e})"
            )));
        }
        return Ok(SurfaceField::one(l_max));
    }
    let b = op.b;
    let mut rhs = DVector::zeros(op.matrix.nrows());
    rhs[0] = -p0 * b * b * (T::lit(4.0) * T::pi()).sqrt();
    let chol = op.chol.as_ref().expect("factorised when κ ≢ 0");
    SurfaceField::from_coeffs(l_max, chol.solve(&rhs).as_slice().to_vec())
}

/// Eigenvalue of the constant-coefficient strong operator on Y_{lm}.
pub fn constant_coefficient_symbol<T: Real>(sigma0: T, kappa0: T, b: T, idx: usize) -> T {
    let (l, _) = degree_order(idx);
    sigma0 * T::of(l * (l + 1)) / (b * b) + kappa0
}
