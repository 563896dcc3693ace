use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::{degree_order, DiscreteSpace, RadialFactor, SurfaceField};

use super::scalar::ScalarBulkField;
use super::toroidal::ToroidalField;
use super::vector::VectorField;

/// Default relative tolerance for the compatibility condition.
pub const DEFAULT_TOL_COMPAT: f64 = 1e-9;

/// Residual ∫_Ω w + ∫_{Γ0} g0 + ∫_{Γ1} g1 and the Cauchy–Schwarz scale of the data.
pub fn compatibility<T: Real>(
    space: &DiscreteSpace<T>,
    w: &ScalarBulkField<T>,
    g0: &SurfaceField<T>,
    g1: &SurfaceField<T>,
) -> (T, T) {
    let geo = space.geometry();
    let (a, b) = (geo.inner_radius(), geo.outer_radius());
    let residual = w.integrate(space) + g0.integrate(a) + g1.integrate(b);
    let scale = w.norm_l2(space) * geo.volume().sqrt()
        + g0.norm_l2(a) * geo.area_gamma0().sqrt()
        + g1.norm_l2(b) * geo.area_gamma1().sqrt();
    (residual, scale)
}

fn check_inputs<T: Real>(
    space: &DiscreteSpace<T>,
    w: &ScalarBulkField<T>,
    g0: &SurfaceField<T>,
    g1: &SurfaceField<T>,
    tol_compat: f64,
) -> Result<()> {
    space.expect_shape(w.l_max(), w.n_r(), "volume data")?;
    space.expect_l_max(g0.l_max(), "Γ0 data")?;
    space.expect_l_max(g1.l_max(), "Γ1 data")?;
    if !space.geometry().is_shell() && g0.max_abs() != T::zero() {
        return Err(Error::Geometry("Γ0 data given on the ball".into()));
    }
    let (residual, scale) = compatibility(space, w, g0, g1);
    let tolerance = tol_compat * scale.as_f64().max(f64::MIN_POSITIVE);
    if residual.as_f64().abs() > tolerance {
        return Err(Error::Compatibility { residual: residual.as_f64().abs(), tolerance });
    }
    Ok(())
}

/// Solves −Δφ = w in Ω with ∂νφ = g0 on Γ0 and ∂νφ = g1 on Γ1 (outward
/// normal derivatives), in Galerkin form mode by mode. The (0,0) profile is
/// pinned to zero volume mean.
pub fn solve_neumann_poisson<T: Real>(
    space: &DiscreteSpace<T>,
    w: &ScalarBulkField<T>,
    g0: &SurfaceField<T>,
    g1: &SurfaceField<T>,
    tol_compat: f64,
) -> Result<ScalarBulkField<T>> {
    check_inputs(space, w, g0, g1, tol_compat)?;
    let rad = space.radial();
    let n = space.n_r();
    let (a, b) = (space.inner_radius(), space.outer_radius());
    let shell = space.geometry().is_shell();
    let mut phi = ScalarBulkField::zeros(space);
    for idx in 0..space.n_modes() {
        let (l, _) = degree_order(idx);
        let mut rhs = DVector::from_iterator(n, w.mode(idx).iter().zip(rad.weights()).map(|(&x, &wj)| x * wj));
        rhs.axpy(b * b * g1.coeffs()[idx], rad.value_at_b(), T::one());
        if shell {
            rhs.axpy(a * a * g0.coeffs()[idx], rad.value_at_a(), T::one());
        }
        let sol = match space.factor(l) {
            RadialFactor::Spd(chol) => chol.solve(&rhs),
            RadialFactor::Bordered(lu) => {
                let ext = DVector::from_iterator(n + 1, rhs.iter().copied().chain(std::iter::once(T::zero())));
                let full = lu.solve(&ext).ok_or_else(|| Error::Singular("bordered Neumann system".into()))?;
                full.rows(0, n).into_owned()
            }
        };
        phi.set_mode(idx, &sol);
    }
    Ok(phi)
}

/// Div–curl system: div s = w, toroidal part = `curl_source`, s·ν = −z0 on
/// Γ0 and s·ν = −z1 on Γ1. Built as s = −∇φ + T.
pub fn solve_div_curl<T: Real>(
    space: &DiscreteSpace<T>,
    w: &ScalarBulkField<T>,
    z0: &SurfaceField<T>,
    z1: &SurfaceField<T>,
    curl_source: &ToroidalField<T>,
    tol_compat: f64,
) -> Result<VectorField<T>> {
    space.expect_shape(curl_source.l_max(), curl_source.n_r(), "curl source")?;
    let phi = solve_neumann_poisson(space, w, z0, z1, tol_compat)?;
    VectorField::from_parts(space, phi.scale(-T::one()), z0.scale(-T::one()), z1.scale(-T::one()), curl_source.clone())
}
