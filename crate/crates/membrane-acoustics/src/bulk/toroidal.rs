use nalgebra::DVectorView;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::{degree_order, DiscreteSpace};

/// Toroidal field T = ∇×(t x) with t = Σ t̂_{lm}(r) Y_{lm}, l ≥ 1.
///
/// Divergence-free and tangent to every sphere by construction; the l = 0
/// profile is identically zero (gauge).
#[derive(Debug, Clone, PartialEq)]
pub struct ToroidalField<T> {
    l_max: usize,
    n_r: usize,
    data: Vec<T>,
}

impl<T: Real> ToroidalField<T> {
    pub fn zeros(space: &DiscreteSpace<T>) -> Self {
        Self::zeros_shape(space.l_max(), space.n_r())
    }

    pub fn zeros_shape(l_max: usize, n_r: usize) -> Self {
        Self { l_max, n_r, data: vec![T::zero(); (l_max + 1) * (l_max + 1) * n_r] }
    }

    pub fn from_data(l_max: usize, n_r: usize, mut data: Vec<T>) -> Result<Self> {
        if data.len() != (l_max + 1) * (l_max + 1) * n_r {
            return Err(Error::SpaceMismatch(format!("toroidal data length {}", data.len())));
        }
        if data[..n_r].iter().any(|x| *x != T::zero()) {
            return Err(Error::SpaceMismatch("toroidal potential must have no l = 0 part".into()));
        }
        data[..n_r].iter_mut().for_each(|x| *x = T::zero());
        Ok(Self { l_max, n_r, data })
    }

    /// ∇×(g(r) Y_{lm} x), l ≥ 1.
    pub fn from_radial(space: &DiscreteSpace<T>, l: usize, m: i64, g: impl Fn(T) -> T) -> Self {
        assert!(l >= 1, "toroidal fields start at l = 1");
        let mut f = Self::zeros(space);
        let idx = space.index().try_index(l, m).expect("harmonic outside truncation");
        let n = f.n_r;
        for (x, &r) in f.data[idx * n..(idx + 1) * n].iter_mut().zip(space.radial_nodes()) {
            *x = g(r);
        }
        f
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn mode(&self, idx: usize) -> &[T] {
        &self.data[idx * self.n_r..(idx + 1) * self.n_r]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| *x == T::zero())
    }

    /// ∫_Ω |T|² = Σ l(l+1) ∫ t̂² r² dr.
    pub fn norm_l2_sq(&self, space: &DiscreteSpace<T>) -> T {
        let w = space.radial_weights();
        let mut s = T::zero();
        for idx in 1..(self.l_max + 1) * (self.l_max + 1) {
            let (l, _) = degree_order(idx);
            let m = self.mode(idx).iter().zip(w).fold(T::zero(), |s, (&t, &wj)| s + wj * t * t);
            s += T::of(l * (l + 1)) * m;
        }
        s
    }

    pub fn norm_l2(&self, space: &DiscreteSpace<T>) -> T {
        self.norm_l2_sq(space).sqrt()
    }

    /// ∫_Ω |curl T|² = Σ ∫ [l²(l+1)² t̂² + l(l+1) ((r t̂)')²] dr.
    pub fn curl_norm_sq(&self, space: &DiscreteSpace<T>) -> T {
        let w = space.radial().line_weights();
        let r = space.radial_nodes();
        let d = space.radial().diff();
        let mut s = T::zero();
        for idx in 1..(self.l_max + 1) * (self.l_max + 1) {
            let (l, _) = degree_order(idx);
            let ll = T::of(l * (l + 1));
            let t = DVectorView::from_slice(self.mode(idx), self.n_r);
            let dt = d * t;
            for j in 0..self.n_r {
                let rt = t[j] + r[j] * dt[j];
                s += w[j] * (ll * ll * t[j] * t[j] + ll * rt * rt);
            }
        }
        s
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &c| m.max(c.mag()))
    }

    pub fn scale(&self, c: T) -> Self {
        Self { l_max: self.l_max, n_r: self.n_r, data: self.data.iter().map(|&x| x * c).collect() }
    }

    pub fn axpy(&mut self, c: T, other: &Self) {
        assert!(self.l_max == other.l_max && self.n_r == other.n_r, "toroidal fields on different spaces");
        for (x, &y) in self.data.iter_mut().zip(&other.data) {
            *x += c * y;
        }
    }
}

impl_linear_ops!(ToroidalField);
