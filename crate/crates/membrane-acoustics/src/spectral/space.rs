use nalgebra::{Cholesky, DMatrix, Dyn, LU};

use super::geometry::Geometry;
use super::harmonics::ShIndex;
use super::radial::RadialGrid;
use super::sphere::SphereGrid;
use crate::error::{Error, Result};
use crate::real::Real;

pub(crate) enum RadialFactor<T: Real> {
    /// Neumann problem for l = 0, bordered with the zero-mean constraint.
    Bordered(LU<T, Dyn, Dyn>),
    Spd(Cholesky<T, Dyn>),
}

/// Truncated spectral space: harmonics up to `l_max` on every sphere, and
/// `n_r` Gauss–Legendre radial nodes on (a, b).
pub struct DiscreteSpace<T: Real> {
    geometry: Geometry<T>,
    index: ShIndex,
    radial: RadialGrid<T>,
    sphere: SphereGrid<T>,
    stiffness: Vec<DMatrix<T>>,
    factors: Vec<RadialFactor<T>>,
}

impl<T: Real> std::fmt::Debug for DiscreteSpace<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteSpace")
            .field("geometry", &self.geometry)
            .field("l_max", &self.l_max())
            .field("n_r", &self.n_r())
            .finish()
    }
}

pub const MAX_L: usize = 64;
pub const MIN_NR: usize = 4;

impl<T: Real> DiscreteSpace<T> {
    pub fn new(geometry: Geometry<T>, l_max: usize, n_r: usize) -> Result<Self> {
        if l_max > MAX_L {
            return Err(Error::Truncation(format!("l_max = {l_max} exceeds {MAX_L}")));
        }
        if n_r < MIN_NR {
            return Err(Error::Truncation(format!("n_r = {n_r} is below {MIN_NR}")));
        }
        let radial = RadialGrid::new(geometry.inner_radius().as_f64(), geometry.outer_radius().as_f64(), n_r);
        let sphere = SphereGrid::new(l_max);
        let mut stiffness = Vec::with_capacity(l_max + 1);
        let mut factors = Vec::with_capacity(l_max + 1);
        for l in 0..=l_max {
            let s = radial.stiffness(l);
            let factor = if l == 0 {
                let mut bordered = DMatrix::zeros(n_r + 1, n_r + 1);
                bordered.view_mut((0, 0), (n_r, n_r)).copy_from(&s);
                for (j, &w) in radial.weights().iter().enumerate() {
                    bordered[(j, n_r)] = w;
                    bordered[(n_r, j)] = w;
                }
                RadialFactor::Bordered(LU::new(bordered))
            } else {
                let chol = Cholesky::new(s.clone())
                    .ok_or_else(|| Error::Singular(format!("radial stiffness for l = {l} is not positive definite")))?;
                RadialFactor::Spd(chol)
            };
            stiffness.push(s);
            factors.push(factor);
        }
        Ok(Self { geometry, index: ShIndex::new(l_max), radial, sphere, stiffness, factors })
    }

    pub fn geometry(&self) -> &Geometry<T> {
        &self.geometry
    }

    pub fn l_max(&self) -> usize {
        self.index.l_max()
    }

    pub fn n_r(&self) -> usize {
        self.radial.len()
    }

    /// Number of harmonics, (l_max + 1)².
    pub fn n_modes(&self) -> usize {
        self.index.len()
    }

    pub fn index(&self) -> &ShIndex {
        &self.index
    }

    pub fn radial(&self) -> &RadialGrid<T> {
        &self.radial
    }

    pub fn radial_nodes(&self) -> &[T] {
        self.radial.nodes()
    }

    pub fn radial_weights(&self) -> &[T] {
        self.radial.weights()
    }

    pub fn sphere(&self) -> &SphereGrid<T> {
        &self.sphere
    }

    pub fn inner_radius(&self) -> T {
        self.geometry.inner_radius()
    }

    pub fn outer_radius(&self) -> T {
        self.geometry.outer_radius()
    }

    /// Radial Galerkin stiffness ∫ (f'g' r² + l(l+1) f g) dr.
    pub fn stiffness(&self, l: usize) -> &DMatrix<T> {
        &self.stiffness[l]
    }

    pub(crate) fn factor(&self, l: usize) -> &RadialFactor<T> {
        &self.factors[l]
    }

    pub(crate) fn expect_l_max(&self, l_max: usize, what: &str) -> Result<()> {
        if l_max != self.l_max() {
            return Err(Error::SpaceMismatch(format!("{what}: l_max {l_max} vs space {}", self.l_max())));
        }
        Ok(())
    }

    pub(crate) fn expect_shape(&self, l_max: usize, n_r: usize, what: &str) -> Result<()> {
        self.expect_l_max(l_max, what)?;
        if n_r != self.n_r() {
            return Err(Error::SpaceMismatch(format!("{what}: n_r {n_r} vs space {}", self.n_r())));
        }
        Ok(())
    }
}
