//! Tensor quadrature on the unit sphere and tabulated harmonics.

use nalgebra::DMatrix;

use super::gauss::gauss_legendre;
use super::harmonics::harmonic_values;
use crate::real::Real;

/// Gauss–Legendre in cos θ times the trapezoid rule in φ, sized to integrate
/// triple products of degree-`l_max` harmonics exactly (variable-coefficient
/// Galerkin entries are such products).
#[derive(Debug, Clone)]
pub struct SphereGrid<T: Real> {
    n_theta: usize,
    n_phi: usize,
    theta: Vec<f64>,
    phi: Vec<f64>,
    weights: Vec<T>,
    /// modes × nodes
    y: DMatrix<T>,
    dtheta: DMatrix<T>,
    dphi: DMatrix<T>,
}

impl<T: Real> SphereGrid<T> {
    pub fn new(l_max: usize) -> Self {
        Self::with_size(l_max, (3 * l_max) / 2 + 2, 3 * l_max + 2)
    }

    pub fn with_size(l_max: usize, n_theta: usize, n_phi: usize) -> Self {
        let (x, wx) = gauss_legendre(n_theta);
        let modes = (l_max + 1) * (l_max + 1);
        let nodes = n_theta * n_phi;
        let dphi_step = 2.0 * std::f64::consts::PI / n_phi as f64;
        let mut theta = Vec::with_capacity(nodes);
        let mut phi = Vec::with_capacity(nodes);
        let mut weights = Vec::with_capacity(nodes);
        let mut y = DMatrix::zeros(modes, nodes);
        let mut dt = DMatrix::zeros(modes, nodes);
        let mut dp = DMatrix::zeros(modes, nodes);
        for (i, (&xi, &wi)) in x.iter().zip(&wx).enumerate() {
            let th = xi.acos();
            for k in 0..n_phi {
                let ph = k as f64 * dphi_step;
                let node = i * n_phi + k;
                let hv = harmonic_values(l_max, th, ph);
                for idx in 0..modes {
                    y[(idx, node)] = T::lit(hv.y[idx]);
                    dt[(idx, node)] = T::lit(hv.dtheta[idx]);
                    dp[(idx, node)] = T::lit(hv.dphi_over_sin[idx]);
                }
                theta.push(th);
                phi.push(ph);
                weights.push(T::lit(wi * dphi_step));
            }
        }
        Self { n_theta, n_phi, theta, phi, weights, y, dtheta: dt, dphi: dp }
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn n_nodes(&self) -> usize {
        self.weights.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Solid-angle weights (sum 4π).
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Harmonic values, modes × nodes.
    pub fn y(&self) -> &DMatrix<T> {
        &self.y
    }

    /// ∂θ Y, modes × nodes.
    pub fn dtheta(&self) -> &DMatrix<T> {
        &self.dtheta
    }

    /// (1/sin θ) ∂φ Y, modes × nodes.
    pub fn dphi(&self) -> &DMatrix<T> {
        &self.dphi
    }

    /// Synthesis: node values of Σ c_i Y_i.
    pub fn synthesize(&self, coeffs: &[T]) -> Vec<T> {
        let c = nalgebra::DVectorView::from_slice(coeffs, coeffs.len());
        (self.y.transpose() * c).iter().copied().collect()
    }

    /// Analysis by quadrature: c_i = Σ_nodes w Y_i f.
    pub fn analyze(&self, values: &[T]) -> Vec<T> {
        let weighted = nalgebra::DVector::from_iterator(
            values.len(),
            values.iter().zip(&self.weights).map(|(&f, &w)| f * w),
        );
        (&self.y * weighted).iter().copied().collect()
    }

    /// Galerkin matrix ∫ c Y_i Y_j dΩ for node values `c`.
    pub fn weighted_gram(&self, c: &[T]) -> DMatrix<T> {
        let mut yw = self.y.clone();
        for (node, (&ci, &wi)) in c.iter().zip(&self.weights).enumerate() {
            let f = ci * wi;
            for idx in 0..yw.nrows() {
                yw[(idx, node)] *= f;
            }
        }
        &yw * self.y.transpose()
    }

    /// Galerkin matrix ∫ c ∇_S Y_i · ∇_S Y_j dΩ for node values `c`.
    pub fn weighted_gradient_gram(&self, c: &[T]) -> DMatrix<T> {
        let mut gt = self.dtheta.clone();
        let mut gp = self.dphi.clone();
        for (node, (&ci, &wi)) in c.iter().zip(&self.weights).enumerate() {
            let f = ci * wi;
            for idx in 0..gt.nrows() {
                gt[(idx, node)] *= f;
                gp[(idx, node)] *= f;
            }
        }
        &gt * self.dtheta.transpose() + &gp * self.dphi.transpose()
    }
}
