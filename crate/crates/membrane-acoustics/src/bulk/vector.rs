use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::{Boundary, DiscreteSpace, SurfaceField};

use super::scalar::ScalarBulkField;
use super::toroidal::ToroidalField;

/// Vector field on Ω: ∇φ plus a toroidal part, together with its normal
/// traces s·ν on Γ0 and Γ1 (ν the outward normal of Ω).
///
/// The traces are carried as data. For a smooth gradient they are the
/// boundary derivatives of φ (see [`VectorField::gradient`]); solver outputs
/// carry exactly the prescribed flux data, and the divergence is the weak
/// one defined by the divergence theorem.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    potential: ScalarBulkField<T>,
    trace_inner: SurfaceField<T>,
    trace_outer: SurfaceField<T>,
    toroidal: ToroidalField<T>,
}

impl<T: Real> VectorField<T> {
    pub fn zeros(space: &DiscreteSpace<T>) -> Self {
        Self {
            potential: ScalarBulkField::zeros(space),
            trace_inner: SurfaceField::zeros(space.l_max()),
            trace_outer: SurfaceField::zeros(space.l_max()),
            toroidal: ToroidalField::zeros(space),
        }
    }

    /// ∇φ with traces from the radial derivative of φ at r = a, b.
    pub fn gradient(space: &DiscreteSpace<T>, phi: &ScalarBulkField<T>) -> Self {
        let rad = space.radial();
        let n = phi.n_modes();
        let outer: Vec<T> = (0..n).map(|i| rad.derivative_at_b().dot(&phi.mode_view(i))).collect();
        let inner: Vec<T> = if space.geometry().is_shell() {
            (0..n).map(|i| -rad.derivative_at_a().dot(&phi.mode_view(i))).collect()
        } else {
            vec![T::zero(); n]
        };
        Self {
            potential: phi.clone().pinned(space),
            trace_inner: SurfaceField::from_coeffs(phi.l_max(), inner).expect("shape"),
            trace_outer: SurfaceField::from_coeffs(phi.l_max(), outer).expect("shape"),
            toroidal: ToroidalField::zeros(space),
        }
    }

    /// c·x = ∇(c r²/2).
    pub fn position(space: &DiscreteSpace<T>, c: T) -> Self {
        Self::gradient(space, &ScalarBulkField::from_radial(space, 0, 0, |r| c * r * r * T::lit(0.5) * (T::lit(4.0) * T::pi()).sqrt()))
    }

    pub fn toroidal_only(space: &DiscreteSpace<T>, t: ToroidalField<T>) -> Self {
        Self { toroidal: t, ..Self::zeros(space) }
    }

    /// Assembles a field from its parts; the potential is re-pinned to zero mean.
    pub fn from_parts(
        space: &DiscreteSpace<T>,
        potential: ScalarBulkField<T>,
        trace_inner: SurfaceField<T>,
        trace_outer: SurfaceField<T>,
        toroidal: ToroidalField<T>,
    ) -> Result<Self> {
        space.expect_shape(potential.l_max(), potential.n_r(), "vector potential")?;
        space.expect_shape(toroidal.l_max(), toroidal.n_r(), "toroidal part")?;
        space.expect_l_max(trace_inner.l_max(), "inner trace")?;
        space.expect_l_max(trace_outer.l_max(), "outer trace")?;
        if !space.geometry().is_shell() && trace_inner.max_abs() != T::zero() {
            return Err(Error::Geometry("the ball has no inner boundary Γ0".into()));
        }
        Ok(Self { potential: potential.pinned(space), trace_inner, trace_outer, toroidal })
    }

    pub fn potential(&self) -> &ScalarBulkField<T> {
        &self.potential
    }

    pub fn toroidal(&self) -> &ToroidalField<T> {
        &self.toroidal
    }

    pub fn trace_inner(&self) -> &SurfaceField<T> {
        &self.trace_inner
    }

    pub fn trace_outer(&self) -> &SurfaceField<T> {
        &self.trace_outer
    }

    pub fn trace(&self, which: Boundary) -> &SurfaceField<T> {
        match which {
            Boundary::Gamma0 => &self.trace_inner,
            Boundary::Gamma1 => &self.trace_outer,
        }
    }

    /// Same field with the toroidal part removed.
    pub fn curl_free_part(&self) -> Self {
        Self { toroidal: self.toroidal.scale(T::zero()), ..self.clone() }
    }

    pub fn l_max(&self) -> usize {
        self.potential.l_max()
    }

    pub fn n_r(&self) -> usize {
        self.potential.n_r()
    }

    pub fn is_curl_free(&self) -> bool {
        self.toroidal.is_zero()
    }

    /// Largest coefficient magnitude over all parts.
    pub fn max_abs(&self) -> T {
        self.potential
            .max_abs()
            .max(self.toroidal.max_abs())
            .max(self.trace_inner.max_abs())
            .max(self.trace_outer.max_abs())
    }

    /// ∫_Ω |s|².
    pub fn norm_l2_sq(&self, space: &DiscreteSpace<T>) -> T {
        self.potential.dot_gradient(space, &self.potential) + self.toroidal.norm_l2_sq(space)
    }

    pub fn norm_l2(&self, space: &DiscreteSpace<T>) -> T {
        self.norm_l2_sq(space).max(T::zero()).sqrt()
    }

    /// ∫_Ω s·q for two fields (the toroidal and gradient families are orthogonal).
    pub fn dot_l2(&self, space: &DiscreteSpace<T>, other: &Self) -> T {
        let tor = {
            let w = space.radial_weights();
            let n = self.n_r();
            let mut s = T::zero();
            for idx in 1..self.potential.n_modes() {
                let (l, _) = crate::spectral::degree_order(idx);
                let a = self.toroidal.mode(idx);
                let b = other.toroidal.mode(idx);
                let m = (0..n).fold(T::zero(), |acc, j| acc + w[j] * a[j] * b[j]);
                s += T::of(l * (l + 1)) * m;
            }
            s
        };
        self.potential.dot_gradient(space, &other.potential) + tor
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            potential: self.potential.scale(c),
            trace_inner: self.trace_inner.scale(c),
            trace_outer: self.trace_outer.scale(c),
            toroidal: self.toroidal.scale(c),
        }
    }

    pub fn axpy(&mut self, c: T, other: &Self) {
        self.potential.axpy(c, &other.potential);
        self.trace_inner.axpy(c, &other.trace_inner);
        self.trace_outer.axpy(c, &other.trace_outer);
        self.toroidal.axpy(c, &other.toroidal);
    }
}

impl_linear_ops!(VectorField);
