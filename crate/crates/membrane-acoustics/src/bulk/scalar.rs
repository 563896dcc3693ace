use nalgebra::{DVector, DVectorView};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::{degree_order, Boundary, DiscreteSpace, SurfaceField};

/// Scalar function on Ω: for every harmonic (l, m), samples of the radial
/// profile at the radial nodes. Stored mode-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarBulkField<T> {
    l_max: usize,
    n_r: usize,
    data: Vec<T>,
}

impl<T: Real> ScalarBulkField<T> {
    pub fn zeros(space: &DiscreteSpace<T>) -> Self {
        Self::zeros_shape(space.l_max(), space.n_r())
    }

    pub fn zeros_shape(l_max: usize, n_r: usize) -> Self {
        Self { l_max, n_r, data: vec![T::zero(); (l_max + 1) * (l_max + 1) * n_r] }
    }

    pub fn from_data(l_max: usize, n_r: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != (l_max + 1) * (l_max + 1) * n_r {
            return Err(Error::SpaceMismatch(format!("bulk field data length {}", data.len())));
        }
        Ok(Self { l_max, n_r, data })
    }

    /// The constant function `c`.
    pub fn constant(space: &DiscreteSpace<T>, c: T) -> Self {
        let mut f = Self::zeros(space);
        let c00 = c * (T::lit(4.0) * T::pi()).sqrt();
        f.mode_mut(0).iter_mut().for_each(|x| *x = c00);
        f
    }

    /// `g(r) Y_{lm}`.
    pub fn from_radial(space: &DiscreteSpace<T>, l: usize, m: i64, g: impl Fn(T) -> T) -> Self {
        let mut f = Self::zeros(space);
        let idx = space.index().try_index(l, m).expect("harmonic outside truncation");
        for (x, &r) in f.mode_mut(idx).iter_mut().zip(space.radial_nodes()) {
            *x = g(r);
        }
        f
    }

    /// Projection of f(r, θ, φ) onto the harmonics at every radial node.
    pub fn from_fn(space: &DiscreteSpace<T>, f: impl Fn(T, f64, f64) -> T) -> Self {
        let mut out = Self::zeros(space);
        let g = space.sphere();
        let n_r = space.n_r();
        for (j, &r) in space.radial_nodes().iter().enumerate() {
            let values: Vec<T> = g.theta().iter().zip(g.phi()).map(|(&t, &p)| f(r, t, p)).collect();
            for (idx, c) in g.analyze(&values).into_iter().enumerate() {
                out.data[idx * n_r + j] = c;
            }
        }
        out
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_modes(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn mode(&self, idx: usize) -> &[T] {
        &self.data[idx * self.n_r..(idx + 1) * self.n_r]
    }

    pub fn mode_mut(&mut self, idx: usize) -> &mut [T] {
        &mut self.data[idx * self.n_r..(idx + 1) * self.n_r]
    }

    pub fn mode_view(&self, idx: usize) -> DVectorView<'_, T> {
        DVectorView::from_slice(self.mode(idx), self.n_r)
    }

    pub fn set_mode(&mut self, idx: usize, v: &DVector<T>) {
        self.mode_mut(idx).copy_from_slice(v.as_slice());
    }

    /// ∫_Ω f dV.
    pub fn integrate(&self, space: &DiscreteSpace<T>) -> T {
        let s = self.mode(0).iter().zip(space.radial_weights()).fold(T::zero(), |s, (&f, &w)| s + f * w);
        s * (T::lit(4.0) * T::pi()).sqrt()
    }

    /// Volume mean.
    pub fn mean(&self, space: &DiscreteSpace<T>) -> T {
        self.integrate(space) / space.geometry().volume()
    }

    /// Removes the volume mean.
    pub fn pinned(mut self, space: &DiscreteSpace<T>) -> Self {
        let shift = self.mean(space) * (T::lit(4.0) * T::pi()).sqrt();
        self.mode_mut(0).iter_mut().for_each(|x| *x -= shift);
        self
    }

    /// L²(Ω) inner product.
    pub fn dot_l2(&self, space: &DiscreteSpace<T>, other: &Self) -> T {
        let w = space.radial_weights();
        let n = self.n_r;
        self.data.iter().zip(&other.data).enumerate().fold(T::zero(), |s, (k, (&x, &y))| s + w[k % n] * x * y)
    }

    pub fn norm_l2(&self, space: &DiscreteSpace<T>) -> T {
        self.dot_l2(space, self).sqrt()
    }

    /// ∫ ∇f · ∇g dV through the radial Galerkin stiffness.
    pub fn dot_gradient(&self, space: &DiscreteSpace<T>, other: &Self) -> T {
        let mut s = T::zero();
        for idx in 0..self.n_modes() {
            let (l, _) = degree_order(idx);
            s += self.mode_view(idx).dot(&(space.stiffness(l) * other.mode_view(idx)));
        }
        s
    }

    pub fn gradient_norm(&self, space: &DiscreteSpace<T>) -> T {
        self.dot_gradient(space, self).max(T::zero()).sqrt()
    }

    pub fn norm_h1(&self, space: &DiscreteSpace<T>) -> T {
        (self.dot_l2(space, self) + self.dot_gradient(space, self)).sqrt()
    }

    /// Trace on a boundary sphere (value of the radial interpolant).
    pub fn boundary_value(&self, space: &DiscreteSpace<T>, which: Boundary) -> Result<SurfaceField<T>> {
        space.geometry().boundary_radius(which)?;
        let row = match which {
            Boundary::Gamma0 => space.radial().value_at_a(),
            Boundary::Gamma1 => space.radial().value_at_b(),
        };
        let coeffs = (0..self.n_modes()).map(|idx| row.dot(&self.mode_view(idx))).collect();
        SurfaceField::from_coeffs(self.l_max, coeffs)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &c| m.max(c.mag()))
    }

    pub fn scale(&self, c: T) -> Self {
        Self { l_max: self.l_max, n_r: self.n_r, data: self.data.iter().map(|&x| x * c).collect() }
    }

    pub fn axpy(&mut self, c: T, other: &Self) {
        assert!(self.l_max == other.l_max && self.n_r == other.n_r, "bulk fields on different spaces");
        for (x, &y) in self.data.iter_mut().zip(&other.data) {
            *x += c * y;
        }
    }

    pub fn cast<U: Real>(&self) -> ScalarBulkField<U> {
        ScalarBulkField { l_max: self.l_max, n_r: self.n_r, data: self.data.iter().map(|c| U::lit(c.as_f64())).collect() }
    }
}

impl_linear_ops!(ScalarBulkField);
