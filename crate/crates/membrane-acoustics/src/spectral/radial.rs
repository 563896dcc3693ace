//! Gauss–Legendre radial grid with polynomial (spectral) differentiation.
//!
//! A radial profile is the degree `n_r − 1` polynomial interpolating its
//! samples at the nodes. Derivatives, boundary values and boundary fluxes are
//! exact for that polynomial.

use nalgebra::{DMatrix, DVector};

use super::gauss::gauss_legendre;
use crate::real::Real;

#[derive(Debug, Clone)]
pub struct RadialGrid<T: Real> {
    a: T,
    b: T,
    nodes: Vec<T>,
    /// Plain mapped weights, ∫_a^b f dr ≈ Σ w_j f(r_j).
    line_weights: Vec<T>,
    /// Weights with the r² factor, ∫_a^b f r² dr ≈ Σ W_j f(r_j).
    weights: Vec<T>,
    diff: DMatrix<T>,
    bary: Vec<f64>,
    ref_nodes: Vec<f64>,
    at_a: DVector<T>,
    at_b: DVector<T>,
    dr_at_a: DVector<T>,
    dr_at_b: DVector<T>,
}

impl<T: Real> RadialGrid<T> {
    pub fn new(a: f64, b: f64, n: usize) -> Self {
        let (x, wref) = gauss_legendre(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let r: Vec<f64> = x.iter().map(|xi| mid + half * xi).collect();
        let w: Vec<f64> = wref.iter().map(|wi| half * wi).collect();
        let big_w: Vec<f64> = w.iter().zip(&r).map(|(wi, ri)| wi * ri * ri).collect();

        // Barycentric weights for Gauss–Legendre points.
        let bary: Vec<f64> = (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                s * ((1.0 - x[j] * x[j]) * wref[j]).sqrt()
            })
            .collect();

        let mut d = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut diag = 0.0;
            for k in 0..n {
                if k != j {
                    let v = (bary[k] / bary[j]) / (x[j] - x[k]) / half;
                    d[(j, k)] = v;
                    diag -= v;
                }
            }
            d[(j, j)] = diag;
        }

        let row_a = barycentric_row(&x, &bary, -1.0);
        let row_b = barycentric_row(&x, &bary, 1.0);
        let dr_a = d.transpose() * &row_a;
        let dr_b = d.transpose() * &row_b;

        let cast_v = |v: &[f64]| v.iter().map(|&t| T::lit(t)).collect::<Vec<T>>();
        let cast_dv = |v: &DVector<f64>| DVector::from_iterator(v.len(), v.iter().map(|&t| T::lit(t)));
        Self {
            a: T::lit(a),
            b: T::lit(b),
            nodes: cast_v(&r),
            line_weights: cast_v(&w),
            weights: cast_v(&big_w),
            diff: d.map(T::lit),
            bary,
            ref_nodes: x,
            at_a: cast_dv(&row_a),
            at_b: cast_dv(&row_b),
            dr_at_a: cast_dv(&dr_a),
            dr_at_b: cast_dv(&dr_b),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn line_weights(&self) -> &[T] {
        &self.line_weights
    }

    /// Quadrature weights including r²; they sum to (b³ − a³)/3.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Differentiation matrix acting on nodal samples.
    pub fn diff(&self) -> &DMatrix<T> {
        &self.diff
    }

    /// Row evaluating the interpolant at r = a.
    pub fn value_at_a(&self) -> &DVector<T> {
        &self.at_a
    }

    /// Row evaluating the interpolant at r = b.
    pub fn value_at_b(&self) -> &DVector<T> {
        &self.at_b
    }

    /// Row evaluating the radial derivative of the interpolant at r = a.
    pub fn derivative_at_a(&self) -> &DVector<T> {
        &self.dr_at_a
    }

    /// Row evaluating the radial derivative of the interpolant at r = b.
    pub fn derivative_at_b(&self) -> &DVector<T> {
        &self.dr_at_b
    }

    /// Row evaluating the interpolant at an arbitrary radius in [a, b].
    pub fn interpolation_row(&self, r: T) -> DVector<T> {
        let (a, b) = (self.a.as_f64(), self.b.as_f64());
        let x = (2.0 * r.as_f64() - a - b) / (b - a);
        barycentric_row(&self.ref_nodes, &self.bary, x).map(T::lit)
    }

    /// Galerkin stiffness for degree `l`: ∫ (f' g' r² + l(l+1) f g) dr.
    pub fn stiffness(&self, l: usize) -> DMatrix<T> {
        let n = self.len();
        let ll = T::of(l * (l + 1));
        let mut wd = self.diff.clone();
        for j in 0..n {
            let wj = self.weights[j];
            for k in 0..n {
                wd[(j, k)] *= wj;
            }
        }
        let mut s = self.diff.transpose() * wd;
        for j in 0..n {
            s[(j, j)] += ll * self.line_weights[j];
        }
        s
    }
}

fn barycentric_row(x: &[f64], bary: &[f64], at: f64) -> DVector<f64> {
    let n = x.len();
    if let Some(k) = x.iter().position(|&xk| xk == at) {
        let mut row = DVector::zeros(n);
        row[k] = 1.0;
        return row;
    }
    let terms: Vec<f64> = (0..n).map(|k| bary[k] / (at - x[k])).collect();
    let total: f64 = terms.iter().sum();
    DVector::from_iterator(n, terms.into_iter().map(|t| t / total))
}
