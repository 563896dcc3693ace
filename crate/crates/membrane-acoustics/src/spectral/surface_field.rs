use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::harmonics::{degree_order, ShIndex};
use super::space::DiscreteSpace;
use crate::error::{Error, Result};
use crate::real::Real;

/// Scalar function on Γ1, Σ ẑ_{lm} Y_{lm}(θ, φ) with unit-sphere harmonics.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceField<T> {
    l_max: usize,
    coeffs: Vec<T>,
}

impl<T: Real> SurfaceField<T> {
    pub fn zeros(l_max: usize) -> Self {
        Self { l_max, coeffs: vec![T::zero(); (l_max + 1) * (l_max + 1)] }
    }

    pub fn from_coeffs(l_max: usize, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != (l_max + 1) * (l_max + 1) {
            return Err(Error::SpaceMismatch(format!(
                "surface field needs {} coefficients, got {}",
                (l_max + 1) * (l_max + 1),
                coeffs.len()
            )));
        }
        Ok(Self { l_max, coeffs })
    }

    /// The constant function `c` on Γ1.
    pub fn constant(l_max: usize, c: T) -> Self {
        let mut f = Self::zeros(l_max);
        f.coeffs[0] = c * (T::lit(4.0) * T::pi()).sqrt();
        f
    }

    /// 𝟙_{Γ1}.
    pub fn one(l_max: usize) -> Self {
        Self::constant(l_max, T::one())
    }

    /// `amplitude · Y_{lm}`.
    pub fn harmonic(l_max: usize, l: usize, m: i64, amplitude: T) -> Self {
        let mut f = Self::zeros(l_max);
        let i = ShIndex::new(l_max).try_index(l, m).expect("harmonic outside truncation");
        f.coeffs[i] = amplitude;
        f
    }

    /// Projection of node values onto the harmonics (exact for band-limited data).
    pub fn from_values(space: &DiscreteSpace<T>, values: &[T]) -> Result<Self> {
        if values.len() != space.sphere().n_nodes() {
            return Err(Error::SpaceMismatch("node value count".into()));
        }
        Ok(Self { l_max: space.l_max(), coeffs: space.sphere().analyze(values) })
    }

    /// Projection of a function of (θ, φ).
    pub fn from_fn(space: &DiscreteSpace<T>, f: impl Fn(f64, f64) -> T) -> Self {
        let g = space.sphere();
        let values: Vec<T> = g.theta().iter().zip(g.phi()).map(|(&t, &p)| f(t, p)).collect();
        Self { l_max: space.l_max(), coeffs: g.analyze(&values) }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn get(&self, l: usize, m: i64) -> T {
        ShIndex::new(self.l_max).try_index(l, m).map_or(T::zero(), |i| self.coeffs[i])
    }

    /// Values at the surface quadrature nodes.
    pub fn values(&self, space: &DiscreteSpace<T>) -> Vec<T> {
        space.sphere().synthesize(&self.coeffs)
    }

    /// Angular mean (coefficient of 𝟙).
    pub fn mean(&self) -> T {
        self.coeffs[0] / (T::lit(4.0) * T::pi()).sqrt()
    }

    /// ∫_{Γ1} f dA = b² √(4π) ẑ₀₀.
    pub fn integrate(&self, b: T) -> T {
        b * b * (T::lit(4.0) * T::pi()).sqrt() * self.coeffs[0]
    }

    /// L²(Γ) norm on a sphere of the given radius.
    pub fn norm_l2(&self, radius: T) -> T {
        radius * self.coeff_norm()
    }

    /// H¹(Γ) norm on a sphere of the given radius: Σ (l(l+1) + ρ²) ẑ².
    pub fn norm_h1(&self, radius: T) -> T {
        let mut s = T::zero();
        for (i, &c) in self.coeffs.iter().enumerate() {
            let (l, _) = degree_order(i);
            s += (T::of(l * (l + 1)) + radius * radius) * c * c;
        }
        s.sqrt()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |s, &c| s + c * c).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, &c| m.max(c.mag()))
    }

    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.l_max, other.l_max, "surface fields on different truncations");
        self.coeffs.iter().zip(&other.coeffs).fold(T::zero(), |s, (&x, &y)| s + x * y)
    }

    pub fn scale(&self, c: T) -> Self {
        Self { l_max: self.l_max, coeffs: self.coeffs.iter().map(|&x| x * c).collect() }
    }

    /// `self += c · other`.
    pub fn axpy(&mut self, c: T, other: &Self) {
        assert_eq!(self.l_max, other.l_max, "surface fields on different truncations");
        for (x, &y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += c * y;
        }
    }

    pub fn cast<U: Real>(&self) -> SurfaceField<U> {
        SurfaceField { l_max: self.l_max, coeffs: self.coeffs.iter().map(|c| U::lit(c.as_f64())).collect() }
    }
}

impl<T: Real> Add for &SurfaceField<T> {
    type Output = SurfaceField<T>;
    fn add(self, rhs: Self) -> SurfaceField<T> {
        let mut out = self.clone();
        out.axpy(T::one(), rhs);
        out
    }
}

impl<T: Real> Sub for &SurfaceField<T> {
    type Output = SurfaceField<T>;
    fn sub(self, rhs: Self) -> SurfaceField<T> {
        let mut out = self.clone();
        out.axpy(-T::one(), rhs);
        out
    }
}

impl<T: Real> Add for SurfaceField<T> {
    type Output = SurfaceField<T>;
    fn add(self, rhs: Self) -> SurfaceField<T> {
        &self + &rhs
    }
}

impl<T: Real> Sub for SurfaceField<T> {
    type Output = SurfaceField<T>;
    fn sub(self, rhs: Self) -> SurfaceField<T> {
        &self - &rhs
    }
}

impl<T: Real> AddAssign<&SurfaceField<T>> for SurfaceField<T> {
    fn add_assign(&mut self, rhs: &SurfaceField<T>) {
        self.axpy(T::one(), rhs);
    }
}

impl<T: Real> SubAssign<&SurfaceField<T>> for SurfaceField<T> {
    fn sub_assign(&mut self, rhs: &SurfaceField<T>) {
        self.axpy(-T::one(), rhs);
    }
}

impl<T: Real> Mul<T> for &SurfaceField<T> {
    type Output = SurfaceField<T>;
    fn mul(self, c: T) -> SurfaceField<T> {
        self.scale(c)
    }
}

impl<T: Real> Neg for &SurfaceField<T> {
    type Output = SurfaceField<T>;
    fn neg(self) -> SurfaceField<T> {
        self.scale(-T::one())
    }
}
