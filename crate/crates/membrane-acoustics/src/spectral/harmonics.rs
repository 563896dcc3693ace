//! Real orthonormal spherical harmonics on the unit sphere.
//!
//! `Y_{l0} = q_l^0(cos θ)`, `Y_{lm} = √2 q_l^m(cos θ) cos(mφ)` and
//! `Y_{l,−m} = √2 q_l^m(cos θ) sin(mφ)` for `m > 0`, where `q_l^m` are the
//! fully normalised associated Legendre functions without the
//! Condon–Shortley phase.

use std::f64::consts::PI;

/// Bijection `(l, m) ↔ l² + l + m` for `0 ≤ l ≤ l_max`, `|m| ≤ l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShIndex {
    l_max: usize,
}

impl ShIndex {
    pub fn new(l_max: usize) -> Self {
        Self { l_max }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn len(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, l: usize, m: i64) -> usize {
        debug_assert!(l <= self.l_max && m.unsigned_abs() as usize <= l);
        flat(l, m)
    }

    /// Flat index if `(l, m)` is inside the truncation.
    pub fn try_index(&self, l: usize, m: i64) -> Option<usize> {
        (l <= self.l_max && m.unsigned_abs() as usize <= l).then(|| flat(l, m))
    }

    #[inline]
    pub fn degree_order(&self, idx: usize) -> (usize, i64) {
        degree_order(idx)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        (0..self.len()).map(|i| {
            let (l, m) = degree_order(i);
            (i, l, m)
        })
    }
}

#[inline]
fn flat(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

#[inline]
pub fn degree_order(idx: usize) -> (usize, i64) {
    let l = (idx as f64).sqrt().floor() as usize;
    let l = if (l + 1) * (l + 1) <= idx { l + 1 } else if l * l > idx { l - 1 } else { l };
    (l, idx as i64 - (l * l + l) as i64)
}

/// Normalised associated Legendre table `q[l][m]` and `dq/dθ` at one `θ`.
pub struct LegendreTable {
    l_max: usize,
    q: Vec<f64>,
    dq: Vec<f64>,
}

impl LegendreTable {
    /// `x = cos θ`, `s = sin θ > 0`.
    pub fn new(l_max: usize, x: f64, s: f64) -> Self {
        let n = (l_max + 1) * (l_max + 2) / 2;
        let mut q = vec![0.0; n];
        let mut dq = vec![0.0; n];
        let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
        q[0] = 1.0 / (4.0 * PI).sqrt();
        for m in 1..=l_max {
            let mf = m as f64;
            q[tri(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * q[tri(m - 1, m - 1)];
        }
        for m in 0..l_max {
            q[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * q[tri(m, m)];
        }
        for m in 0..=l_max {
            for l in (m + 2)..=l_max {
                let (lf, mf) = (l as f64, m as f64);
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
                q[tri(l, m)] = a * (x * q[tri(l - 1, m)] - b * q[tri(l - 2, m)]);
            }
        }
        for l in 0..=l_max {
            for m in 0..=l {
                let (lf, mf) = (l as f64, m as f64);
                let lower = if l > m {
                    ((2.0 * lf + 1.0) * (lf - mf) * (lf + mf) / (2.0 * lf - 1.0)).sqrt() * q[tri(l - 1, m)]
                } else {
                    0.0
                };
                dq[tri(l, m)] = (lf * x * q[tri(l, m)] - lower) / s;
            }
        }
        Self { l_max, q, dq }
    }

    #[inline]
    pub fn q(&self, l: usize, m: usize) -> f64 {
        debug_assert!(m <= l && l <= self.l_max);
        self.q[l * (l + 1) / 2 + m]
    }

    #[inline]
    pub fn dq(&self, l: usize, m: usize) -> f64 {
        self.dq[l * (l + 1) / 2 + m]
    }
}

/// Values of `Y`, `∂θ Y` and `(1/sin θ) ∂φ Y` for every harmonic at `(θ, φ)`.
pub struct HarmonicValues {
    pub y: Vec<f64>,
    pub dtheta: Vec<f64>,
    pub dphi_over_sin: Vec<f64>,
}

pub fn harmonic_values(l_max: usize, theta: f64, phi: f64) -> HarmonicValues {
    let (s, x) = theta.sin_cos();
    let table = LegendreTable::new(l_max, x, s);
    let len = (l_max + 1) * (l_max + 1);
    let mut out = HarmonicValues { y: vec![0.0; len], dtheta: vec![0.0; len], dphi_over_sin: vec![0.0; len] };
    let r2 = std::f64::consts::SQRT_2;
    for l in 0..=l_max {
        out.y[flat(l, 0)] = table.q(l, 0);
        out.dtheta[flat(l, 0)] = table.dq(l, 0);
        for m in 1..=l {
            let mf = m as f64;
            let (sm, cm) = (mf * phi).sin_cos();
            let (q, dq) = (r2 * table.q(l, m), r2 * table.dq(l, m));
            let (ip, im) = (flat(l, m as i64), flat(l, -(m as i64)));
            out.y[ip] = q * cm;
            out.y[im] = q * sm;
            out.dtheta[ip] = dq * cm;
            out.dtheta[im] = dq * sm;
            out.dphi_over_sin[ip] = -mf * q * sm / s;
            out.dphi_over_sin[im] = mf * q * cm / s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        let ix = ShIndex::new(12);
        for (i, l, m) in ix.iter() {
            assert_eq!(ix.index(l, m), i);
            assert_eq!(degree_order(i), (l, m));
        }
        assert_eq!(ix.len(), 169);
    }

    #[test]
    fn low_order_closed_forms() {
        let (theta, phi) = (0.7_f64, 1.3_f64);
        let v = harmonic_values(2, theta, phi);
        let c = theta.cos();
        let y00 = 1.0 / (4.0 * PI).sqrt();
        let y10 = (3.0 / (4.0 * PI)).sqrt() * c;
        let y20 = (5.0 / (16.0 * PI)).sqrt() * (3.0 * c * c - 1.0);
        let y11 = (3.0 / (4.0 * PI)).sqrt() * theta.sin() * phi.cos();
        assert!((v.y[0] - y00).abs() < 1e-14);
        assert!((v.y[2] - y10).abs() < 1e-14);
        assert!((v.y[6] - y20).abs() < 1e-14);
        assert!((v.y[3] - y11).abs() < 1e-14);
        let dy20 = (5.0 / (16.0 * PI)).sqrt() * (-6.0 * c * theta.sin());
        assert!((v.dtheta[6] - dy20).abs() < 1e-14);
    }

    #[test]
    fn theta_derivative_matches_finite_difference() {
        let l_max = 9;
        let (theta, phi, h) = (1.1_f64, 0.4_f64, 1e-6);
        let v = harmonic_values(l_max, theta, phi);
        let p = harmonic_values(l_max, theta + h, phi);
        let m = harmonic_values(l_max, theta - h, phi);
        let pp = harmonic_values(l_max, theta, phi + h);
        let mp = harmonic_values(l_max, theta, phi - h);
        for i in 0..v.y.len() {
            let fd = (p.y[i] - m.y[i]) / (2.0 * h);
            assert!((fd - v.dtheta[i]).abs() < 1e-7, "dθ at {i}");
            let fdp = (pp.y[i] - mp.y[i]) / (2.0 * h) / theta.sin();
            assert!((fdp - v.dphi_over_sin[i]).abs() < 1e-7, "dφ at {i}");
        }
    }
}
