use nalgebra::DVector;

use crate::error::Result;
use crate::real::Real;
use crate::spectral::{degree_order, Boundary, DiscreteSpace, SurfaceField};

use super::scalar::ScalarBulkField;
use super::vector::VectorField;

/// div s, defined mode-wise by the divergence theorem against every radial
/// test profile: ∫ div s · w = −∫ ∇φ·∇w + ∫_Γ (s·ν) w. For smooth gradients
/// this is Δφ = φ'' + (2/r)φ' − l(l+1)φ/r²; toroidal parts contribute zero.
pub fn divergence<T: Real>(space: &DiscreteSpace<T>, s: &VectorField<T>) -> Result<ScalarBulkField<T>> {
    space.expect_shape(s.l_max(), s.n_r(), "divergence")?;
    let rad = space.radial();
    let (a, b) = (space.inner_radius(), space.outer_radius());
    let shell = space.geometry().is_shell();
    let w = rad.weights();
    let mut out = ScalarBulkField::zeros(space);
    for idx in 0..space.n_modes() {
        let (l, _) = degree_order(idx);
        let mut rhs: DVector<T> = -(space.stiffness(l) * s.potential().mode_view(idx));
        rhs.axpy(b * b * s.trace_outer().coeffs()[idx], rad.value_at_b(), T::one());
        if shell {
            rhs.axpy(a * a * s.trace_inner().coeffs()[idx], rad.value_at_a(), T::one());
        }
        for (x, (&r, &wj)) in out.mode_mut(idx).iter_mut().zip(rhs.iter().zip(w)) {
            *x = r / wj;
        }
    }
    Ok(out)
}

/// s·ν on a boundary sphere (outward normal of Ω, so −∂φ/∂r on Γ0).
pub fn normal_trace<T: Real>(space: &DiscreteSpace<T>, s: &VectorField<T>, which: Boundary) -> Result<SurfaceField<T>> {
    space.expect_shape(s.l_max(), s.n_r(), "normal_trace")?;
    space.geometry().boundary_radius(which)?;
    Ok(s.trace(which).clone())
}

/// Gaffney-type H¹ norm: ‖s‖² + ‖div s‖² + ‖curl s‖² + ‖s·ν‖²_{L²(Γ)}.
pub fn norm_h1<T: Real>(space: &DiscreteSpace<T>, s: &VectorField<T>) -> Result<T> {
    let div = divergence(space, s)?;
    let mut total = s.norm_l2_sq(space) + div.dot_l2(space, &div) + s.toroidal().curl_norm_sq(space);
    let b = space.outer_radius();
    total += b * b * s.trace_outer().dot(s.trace_outer());
    if space.geometry().is_shell() {
        let a = space.inner_radius();
        total += a * a * s.trace_inner().dot(s.trace_inner());
    }
    Ok(total.max(T::zero()).sqrt())
}
