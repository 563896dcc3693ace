//! Time-harmonic modes of the constant-coefficient problem on the ball.
//!
//! With u = A j_l(kr) Y_lm e^{iωt}, k = ω√(ρ0/B), the boundary conditions
//! reduce to F_l(ω) = Z(ω)·k j_l'(kb) − ρ0ω² j_l(kb) = 0 with
//! Z(ω) = −μω² + σl(l+1)/b² + iωδ + κ. Generator eigenvalues are λ = iω.

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::engine::Generator;
use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::spectral::Geometry;

/// Spherical Bessel functions j_0..=j_n at complex z.
pub fn spherical_bessel(n: usize, z: Complex64) -> Vec<Complex64> {
    if z.norm() < n as f64 + 2.0 {
        (0..=n).map(|l| bessel_series(l, z)).collect()
    } else {
        let mut out = Vec::with_capacity(n + 1);
        let (s, c) = (z.sin(), z.cos());
        out.push(s / z);
        if n >= 1 {
            out.push(s / (z * z) - c / z);
        }
        for l in 1..n {
            let next = out[l] * ((2 * l + 1) as f64) / z - out[l - 1];
            out.push(next);
        }
        out
    }
}

/// z^l/(2l+1)!! Σ_k (−z²/2)^k / (k! (2l+3)(2l+5)…(2l+2k+1)).
fn bessel_series(l: usize, z: Complex64) -> Complex64 {
    let mut lead = Complex64::new(1.0, 0.0);
    for k in 0..l {
        lead *= z / ((2 * k + 3) as f64);
    }
    let q = -z * z * 0.5;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
    }
    lead * sum
}

/// j_l and its derivative at z.
pub fn spherical_bessel_with_derivative(l: usize, z: Complex64) -> (Complex64, Complex64) {
    let j = spherical_bessel(l + 1, z);
    let d = if l == 0 { -j[1] } else { j[l - 1] - j[l] * ((l + 1) as f64) / z };
    // Near z = 0 the recurrence form loses accuracy; use j_l' = (l/z) j_l − j_{l+1}.
    let d = if l > 0 && z.norm() < 1.0 { j[l] * (l as f64) / z - j[l + 1] } else { d };
    (j[l], d)
}

/// Constant coefficient values needed by the characteristic function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParameters {
    pub rho0: f64,
    pub bulk: f64,
    pub mu: f64,
    pub sigma: f64,
    pub delta: f64,
    pub kappa: f64,
    pub b: f64,
}

impl ModeParameters {
    pub fn from_coefficients(coeffs: &Coefficients<f64>, geometry: &Geometry<f64>) -> Result<Self> {
        if geometry.is_shell() {
            return Err(Error::Geometry("dispersion roots are implemented for the ball".into()));
        }
        if !coeffs.is_constant() {
            return Err(Error::Coefficient("dispersion roots need constant coefficients".into()));
        }
        let c0 = |f: &crate::spectral::SurfaceField<f64>| f.mean();
        Ok(Self {
            rho0: coeffs.rho0,
            bulk: coeffs.bulk,
            mu: c0(&coeffs.mu),
            sigma: c0(&coeffs.sigma),
            delta: c0(&coeffs.delta),
            kappa: c0(&coeffs.kappa),
            b: geometry.outer_radius(),
        })
    }

    /// The terms Z·k j_l'(kb) and ρ0ω² j_l(kb) of F_l(ω).
    fn terms(&self, l: usize, w: Complex64) -> (Complex64, Complex64) {
        let i = Complex64::i();
        let k = w * (self.rho0 / self.bulk).sqrt();
        let (j, dj) = spherical_bessel_with_derivative(l, k * self.b);
        let z = -self.mu * w * w + self.sigma * (l * (l + 1)) as f64 / (self.b * self.b) + i * w * self.delta + self.kappa;
        (z * k * dj, self.rho0 * w * w * j)
    }

    pub fn characteristic(&self, l: usize, w: Complex64) -> Complex64 {
        let (a, b) = self.terms(l, w);
        a - b
    }

    /// |F_l(ω)| relative to the magnitudes of its two terms.
    pub fn relative_residual(&self, l: usize, w: Complex64) -> f64 {
        let (a, b) = self.terms(l, w);
        let s = a.norm() + b.norm();
        if s > 0.0 {
            (a - b).norm() / s
        } else {
            0.0
        }
    }

    /// Order of the zero of F_l at ω = 0.
    fn origin_order(l: usize) -> i32 {
        if l == 0 {
            2
        } else {
            l as i32
        }
    }

    /// F_l(ω)/ω^m, entire and nonzero at the origin.
    fn reduced(&self, l: usize, w: Complex64) -> Complex64 {
        if w.norm() < 1e-8 {
            let h = 1e-8 * Complex64::new(1.0, 0.3);
            return self.characteristic(l, h) / h.powi(Self::origin_order(l));
        }
        self.characteristic(l, w) / w.powi(Self::origin_order(l))
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    fn contains(&self, w: Complex64) -> bool {
        w.re >= self.x0 && w.re <= self.x1 && w.im >= self.y0 && w.im <= self.y1
    }

    fn quarters(&self) -> [Rect; 4] {
        let (xm, ym) = (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1));
        [
            Rect { x0: self.x0, x1: xm, y0: self.y0, y1: ym },
            Rect { x0: xm, x1: self.x1, y0: self.y0, y1: ym },
            Rect { x0: self.x0, x1: xm, y0: ym, y1: self.y1 },
            Rect { x0: xm, x1: self.x1, y0: ym, y1: self.y1 },
        ]
    }
}

/// Change of arg f along the segment p → q, refined until every step turns
/// by less than a quarter radian.
fn arg_change(f: &dyn Fn(Complex64) -> Complex64, p: Complex64, q: Complex64) -> Option<f64> {
    fn rec(f: &dyn Fn(Complex64) -> Complex64, p: Complex64, fp: Complex64, q: Complex64, fq: Complex64, depth: u32) -> Option<f64> {
        let d = (fq / fp).arg();
        if d.abs() < 0.25 {
            return Some(d);
        }
        if depth > 40 {
            return None;
        }
        let m = 0.5 * (p + q);
        let fm = f(m);
        if fm.norm() == 0.0 || !fm.norm().is_finite() {
            return None;
        }
        Some(rec(f, p, fp, m, fm, depth + 1)? + rec(f, m, fm, q, fq, depth + 1)?)
    }
    let n = 16;
    let mut total = 0.0;
    let mut a = p;
    let mut fa = f(a);
    for k in 1..=n {
        let b = p + (q - p) * (k as f64 / n as f64);
        let fb = f(b);
        if fa.norm() == 0.0 || fb.norm() == 0.0 {
            return None;
        }
        total += rec(f, a, fa, b, fb, 0)?;
        a = b;
        fa = fb;
    }
    Some(total)
}

fn winding(f: &dyn Fn(Complex64) -> Complex64, r: &Rect) -> Option<i64> {
    let c = [
        Complex64::new(r.x0, r.y0),
        Complex64::new(r.x1, r.y0),
        Complex64::new(r.x1, r.y1),
        Complex64::new(r.x0, r.y1),
    ];
    let mut total = 0.0;
    for k in 0..4 {
        total += arg_change(f, c[k], c[(k + 1) % 4])?;
    }
    Some((total / (2.0 * std::f64::consts::PI)).round() as i64)
}

fn newton(f: &dyn Fn(Complex64) -> Complex64, mut w: Complex64) -> Complex64 {
    for _ in 0..60 {
        let h = 1e-7 * w.norm().max(1.0);
        let d = (f(w + h) - f(w - h)) / (2.0 * h);
        let step = f(w) / d;
        w -= step;
        if step.norm() <= 1e-15 * w.norm().max(1.0) {
            break;
        }
    }
    w
}

fn roots_in(f: &dyn Fn(Complex64) -> Complex64, rect: Rect, depth: u32, out: &mut Vec<Complex64>) {
    let count = match winding(f, &rect) {
        Some(c) => c,
        None => {
            // A zero sits on the contour; shift it slightly.
            let e = 1e-3 * rect.diameter();
            let shifted = Rect { x0: rect.x0 - e * 0.37, x1: rect.x1 + e * 0.61, y0: rect.y0 - e * 0.53, y1: rect.y1 + e * 0.29 };
            match winding(f, &shifted) {
                Some(c) => c,
                None => return,
            }
        }
    };
    if count <= 0 {
        return;
    }
    if count == 1 || depth > 30 || rect.diameter() < 1e-9 {
        let w = newton(f, rect.center());
        let e = 0.05 * rect.diameter();
        let grown = Rect { x0: rect.x0 - e, x1: rect.x1 + e, y0: rect.y0 - e, y1: rect.y1 + e };
        if grown.contains(w) {
            out.push(w);
            if count == 1 {
                return;
            }
        }
        if depth > 30 || rect.diameter() < 1e-9 {
            return;
        }
    }
    for q in rect.quarters() {
        roots_in(f, q, depth + 1, out);
    }
}

/// Roots of F_l with Re ω ≥ 0, sorted by modulus; at least `wanted` of them
/// when the window can be widened to find them.
pub fn dispersion_roots(params: &ModeParameters, l: usize, wanted: usize) -> Result<Vec<Complex64>> {
    let f = |w: Complex64| params.reduced(l, w);
    let c = (params.bulk / params.rho0).sqrt();
    let mut width = 4.0 * std::f64::consts::PI * c / params.b + 2.0 * (params.sigma * (l * (l + 1)) as f64 + params.kappa).sqrt();
    for attempt in 0..8 {
        // Box offsets keep the imaginary axis and real axis off the contour.
        let rect = Rect { x0: -0.0131 * width, x1: width, y0: -0.0173 * width, y1: 0.5 * width + 2.0 * params.delta / params.mu };
        let mut found = Vec::new();
        roots_in(&f, rect, 0, &mut found);
        let mut roots: Vec<Complex64> = Vec::new();
        for w in found {
            if w.re < -1e-12 || params.relative_residual(l, w) > 1e-10 || w.norm() < 1e-6 {
                continue;
            }
            if roots.iter().all(|r| (r - w).norm() > 1e-8 * w.norm().max(1.0)) {
                roots.push(w);
            }
        }
        roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        if roots.len() >= wanted {
            return Ok(roots);
        }
        warn!("dispersion scan for l = {l}: {} of {wanted} roots in window {width:.3}, widening (attempt {attempt})", roots.len());
        width *= 2.0;
    }
    Err(Error::NoSolution(format!("fewer than {wanted} dispersion roots found for l = {l}")))
}

/// Eigenvalues of the semi-discrete generator restricted to the harmonic
/// (l, 0), for a mode-diagonal generator. The block is rescaled by the mass
/// square roots before the dense eigensolve.
pub fn generator_eigenvalues(gen: &Generator<'_, f64>, l: usize) -> Result<Vec<Complex64>> {
    if !gen.is_mode_diagonal() {
        return Err(Error::Coefficient("per-degree eigenvalues need constant coefficients".into()));
    }
    let space = gen.space();
    if l > space.l_max() {
        return Err(Error::Truncation(format!("l = {l} exceeds l_max = {}", space.l_max())));
    }
    let n = space.n_r();
    let idx = space.index().index(l, 0);
    let s = gen.bulk_stiffness(l);
    let mu = gen.bulk_mass();
    let mv = gen.mass_v()[(idx, idx)];
    let kv = gen.membrane().matrix()[(idx, idx)];
    let dv = gen.damping()[(idx, idx)];
    let c = gen.coupling();
    let eb = space.radial().value_at_b();
    // Variables (u, M_u^{1/2} a, v, M_v^{1/2} w).
    let dim = 2 * n + 2;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..n {
        a[(i, n + i)] = 1.0 / mu[i].sqrt();
        for j in 0..n {
            a[(n + i, j)] = -s[(i, j)] / mu[i].sqrt();
        }
        a[(n + i, 2 * n + 1)] = c * eb[i] / (mu[i] * mv).sqrt();
        a[(2 * n + 1, n + i)] = -c * eb[i] / (mu[i] * mv).sqrt();
    }
    a[(2 * n, 2 * n + 1)] = 1.0 / mv.sqrt();
    a[(2 * n + 1, 2 * n)] = -kv / mv.sqrt();
    a[(2 * n + 1, 2 * n + 1)] = -dv / mv;
    Ok(a.complex_eigenvalues().iter().copied().collect())
}
