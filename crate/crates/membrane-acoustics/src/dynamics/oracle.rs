//! Dense reference propagator for small truncations.
//!
//! The first-order system is assembled from scratch: Lagrange basis values
//! and derivatives by the product formula, a finer radial Gauss rule, and a
//! doubled sphere grid for the boundary matrices. It is then split into
//! connected components and integrated with classical RK4.

use nalgebra::{DMatrix, DVector};

use super::state::PotentialState;
use crate::bulk::ScalarBulkField;
use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::spectral::{degree_order, gauss_legendre, DiscreteSpace, SphereGrid, SurfaceField};

pub const ORACLE_MAX_L: usize = 4;
pub const ORACLE_MAX_NR: usize = 32;
pub const DEFAULT_DT_REF: f64 = 1e-5;

/// Values and derivatives of the Lagrange basis on `nodes` at x.
fn lagrange(nodes: &[f64], x: f64) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut val = vec![0.0; n];
    let mut der = vec![0.0; n];
    for j in 0..n {
        let mut p = 1.0;
        for k in 0..n {
            if k != j {
                p *= (x - nodes[k]) / (nodes[j] - nodes[k]);
            }
        }
        val[j] = p;
        // d/dx Π_k (x − x_k)/(x_j − x_k) = Σ_i 1/(x_j − x_i) Π_{k≠i,j} (x − x_k)/(x_j − x_k)
        let mut d = 0.0;
        for i in 0..n {
            if i == j {
                continue;
            }
            let mut q = 1.0 / (nodes[j] - nodes[i]);
            for k in 0..n {
                if k != j && k != i {
                    q *= (x - nodes[k]) / (nodes[j] - nodes[k]);
                }
            }
            d += q;
        }
        der[j] = d;
    }
    (val, der)
}

/// y' = A y with y = (u, u_t, v, v_t), split into decoupled blocks.
pub struct ReferenceOracle {
    n_modes: usize,
    n_r: usize,
    blocks: Vec<(Vec<usize>, DMatrix<f64>)>,
}

impl std::fmt::Debug for ReferenceOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReferenceOracle")
            .field("n_modes", &self.n_modes)
            .field("n_r", &self.n_r)
            .field("blocks", &self.blocks.len())
            .finish()
    }
}

impl ReferenceOracle {
    pub fn new(space: &DiscreteSpace<f64>, coeffs: &Coefficients<f64>) -> Result<Self> {
        let (l_max, n_r) = (space.l_max(), space.n_r());
        if l_max > ORACLE_MAX_L || n_r > ORACLE_MAX_NR {
            return Err(Error::SizeGuard(format!(
                "l_max = {l_max}, n_r = {n_r} (limits {ORACLE_MAX_L}, {ORACLE_MAX_NR})"
            )));
        }
        coeffs.validate(space)?;
        let a = full_matrix(space, coeffs);
        Ok(Self { n_modes: space.n_modes(), n_r, blocks: components(&a) })
    }

    pub fn dense(space: &DiscreteSpace<f64>, coeffs: &Coefficients<f64>) -> Result<DMatrix<f64>> {
        coeffs.validate(space)?;
        Ok(full_matrix(space, coeffs))
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    fn pack(&self, x: &PotentialState<f64>) -> DVector<f64> {
        let mut y = Vec::with_capacity(2 * self.n_modes * (self.n_r + 1));
        y.extend_from_slice(x.u.data());
        y.extend_from_slice(x.u_t.data());
        y.extend_from_slice(x.v.coeffs());
        y.extend_from_slice(x.v_t.coeffs());
        DVector::from_vec(y)
    }

    fn unpack(&self, y: &DVector<f64>, l_max: usize, t: f64) -> PotentialState<f64> {
        let nb = self.n_modes * self.n_r;
        let nm = self.n_modes;
        let s = y.as_slice();
        PotentialState {
            u: ScalarBulkField::from_data(l_max, self.n_r, s[..nb].to_vec()).expect("shape"),
            u_t: ScalarBulkField::from_data(l_max, self.n_r, s[nb..2 * nb].to_vec()).expect("shape"),
            v: SurfaceField::from_coeffs(l_max, s[2 * nb..2 * nb + nm].to_vec()).expect("shape"),
            v_t: SurfaceField::from_coeffs(l_max, s[2 * nb + nm..].to_vec()).expect("shape"),
            t,
        }
    }

    /// RK4 from `initial` over `duration` with steps of at most `dt_ref`.
    pub fn propagate(&self, initial: &PotentialState<f64>, duration: f64, dt_ref: f64) -> Result<PotentialState<f64>> {
        if !(dt_ref > 0.0) || !(duration >= 0.0) {
            return Err(Error::Trajectory(format!("bad oracle step {dt_ref} or duration {duration}")));
        }
        let n_steps = (duration / dt_ref).ceil().max(0.0) as usize;
        let h = if n_steps == 0 { 0.0 } else { duration / n_steps as f64 };
        let y0 = self.pack(initial);
        let mut y = y0.clone();
        for (idx, a) in &self.blocks {
            let mut z = DVector::from_iterator(idx.len(), idx.iter().map(|&i| y0[i]));
            let mut k = DVector::zeros(idx.len());
            let mut acc = DVector::zeros(idx.len());
            let mut tmp = DVector::zeros(idx.len());
            for _ in 0..n_steps {
                // k1
                k.gemv(1.0, a, &z, 0.0);
                acc.copy_from(&k);
                tmp.copy_from(&z);
                tmp.axpy(0.5 * h, &k, 1.0);
                // k2
                k.gemv(1.0, a, &tmp, 0.0);
                acc.axpy(2.0, &k, 1.0);
                tmp.copy_from(&z);
                tmp.axpy(0.5 * h, &k, 1.0);
                // k3
                k.gemv(1.0, a, &tmp, 0.0);
                acc.axpy(2.0, &k, 1.0);
                tmp.copy_from(&z);
                tmp.axpy(h, &k, 1.0);
                // k4
                k.gemv(1.0, a, &tmp, 0.0);
                acc += &k;
                z.axpy(h / 6.0, &acc, 1.0);
            }
            for (j, &i) in idx.iter().enumerate() {
                y[i] = z[j];
            }
        }
        Ok(self.unpack(&y, initial.u.l_max(), initial.t + duration))
    }
}

/// Propagates `initial` by `duration` with the dense reference at `dt_ref`.
pub fn reference_oracle(
    space: &DiscreteSpace<f64>,
    coeffs: &Coefficients<f64>,
    initial: &PotentialState<f64>,
    duration: f64,
    dt_ref: f64,
) -> Result<PotentialState<f64>> {
    ReferenceOracle::new(space, coeffs)?.propagate(initial, duration, dt_ref)
}

fn full_matrix(space: &DiscreteSpace<f64>, coeffs: &Coefficients<f64>) -> DMatrix<f64> {
    let n = space.n_r();
    let nm = space.n_modes();
    let l_max = space.l_max();
    let (ra, rb) = (space.inner_radius(), space.outer_radius());
    let nodes = space.radial_nodes().to_vec();
    let (rho0, bulk) = (coeffs.rho0, coeffs.bulk);

    // Lumped radial mass W_j = w_j r_j² from an n-point rule, and the
    // gradient form from an (n + 7)-point rule, exact for these degrees.
    let half = 0.5 * (rb - ra);
    let mid = 0.5 * (ra + rb);
    let (xg, wg) = gauss_legendre(n);
    let mass: Vec<f64> = xg.iter().zip(&wg).map(|(x, w)| half * w * (mid + half * x).powi(2)).collect();
    let (xq, wq) = gauss_legendre(n + 7);
    let mut grad = DMatrix::<f64>::zeros(n, n);
    let mut plain = DMatrix::<f64>::zeros(n, n);
    for (x, w) in xq.iter().zip(&wq) {
        let r = mid + half * x;
        let (val, der) = lagrange(&nodes, r);
        for i in 0..n {
            for j in 0..n {
                grad[(i, j)] += half * w * r * r * der[i] * der[j];
                plain[(i, j)] += half * w * val[i] * val[j];
            }
        }
    }
    let (eb, _) = lagrange(&nodes, rb);

    // Boundary matrices on a doubled sphere grid.
    let base = SphereGrid::<f64>::new(l_max);
    let fine = SphereGrid::<f64>::with_size(l_max, 2 * base.n_theta(), 2 * base.n_phi());
    let at = |f: &SurfaceField<f64>| fine.synthesize(f.coeffs());
    let b2 = rb * rb;
    let mass_v = fine.weighted_gram(&at(&coeffs.mu)) * b2;
    let damp = fine.weighted_gram(&at(&coeffs.delta)) * b2;
    let stiff = fine.weighted_gradient_gram(&at(&coeffs.sigma)) + fine.weighted_gram(&at(&coeffs.kappa)) * b2;
    let mass_v_inv = mass_v.clone().try_inverse().expect("membrane mass is positive definite");

    let nb = nm * n;
    let dim = 2 * nb + 2 * nm;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let (iu, ia, iv, iw) = (0, nb, 2 * nb, 2 * nb + nm);
    for idx in 0..nm {
        let (l, _) = degree_order(idx);
        let ll = (l * (l + 1)) as f64;
        for i in 0..n {
            let row = idx * n + i;
            a[(iu + row, ia + row)] = 1.0;
            // M_u a_t = −ρ0 S u + ρ0 b² w e_b with M_u = (ρ0²/B) W.
            let m = rho0 * rho0 / bulk * mass[i];
            for j in 0..n {
                a[(ia + row, iu + idx * n + j)] = -rho0 * (grad[(i, j)] + ll * plain[(i, j)]) / m;
            }
            a[(ia + row, iw + idx)] = rho0 * b2 * eb[i] / m;
        }
        a[(iv + idx, iw + idx)] = 1.0;
    }
    // M_v w_t = −K v − D w − ρ0 b² (e_b · a).
    for p in 0..nm {
        for q in 0..nm {
            let mut kq = 0.0;
            let mut dq = 0.0;
            for s in 0..nm {
                kq += mass_v_inv[(p, s)] * stiff[(s, q)];
                dq += mass_v_inv[(p, s)] * damp[(s, q)];
            }
            a[(iw + p, iv + q)] = -kq;
            a[(iw + p, iw + q)] = -dq;
            for j in 0..n {
                a[(iw + p, ia + q * n + j)] = -mass_v_inv[(p, q)] * rho0 * b2 * eb[j];
            }
        }
    }
    a
}

/// Connected components of the sparsity graph, ignoring entries below
/// round-off relative to the largest entry.
fn components(a: &DMatrix<f64>) -> Vec<(Vec<usize>, DMatrix<f64>)> {
    let n = a.nrows();
    let cut = 1e-14 * a.amax();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..n {
            if a[(i, j)].abs() > cut {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups
        .into_values()
        .map(|idx| {
            let m = DMatrix::from_fn(idx.len(), idx.len(), |p, q| {
                let v = a[(idx[p], idx[q])];
                if v.abs() > cut {
                    v
                } else {
                    0.0
                }
            });
            (idx, m)
        })
        .collect()
}
