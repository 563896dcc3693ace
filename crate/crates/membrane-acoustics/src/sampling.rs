//! Seeded random band-limited fields for property suites.

use rand::Rng;

use crate::bulk::{solve_div_curl, ScalarBulkField, ToroidalField, VectorField, DEFAULT_TOL_COMPAT};
use crate::equilibria::ConfigurationPair;
use crate::real::Real;
use crate::spectral::{DiscreteSpace, SurfaceField};

/// Radial polynomial degree of sampled profiles.
const DEGREE: usize = 4;

fn amplitude(l: usize) -> f64 {
    1.0 / (1.0 + l as f64)
}

fn profile<R: Rng + ?Sized>(rng: &mut R) -> [f64; DEGREE + 1] {
    std::array::from_fn(|_| rng.random_range(-1.0..1.0))
}

fn horner(c: &[f64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * r + ck)
}

/// Smooth scalar field: r^l times a random quartic per mode.
pub fn scalar<T: Real, R: Rng + ?Sized>(space: &DiscreteSpace<T>, rng: &mut R) -> ScalarBulkField<T> {
    let mut f = ScalarBulkField::zeros(space);
    let nodes: Vec<f64> = space.radial_nodes().iter().map(|r| r.as_f64()).collect();
    for idx in 0..space.n_modes() {
        let (l, _) = space.index().degree_order(idx);
        let c = profile(rng);
        let amp = amplitude(l);
        for (x, &r) in f.mode_mut(idx).iter_mut().zip(&nodes) {
            *x = T::lit(amp * r.powi(l as i32) * horner(&c, r));
        }
    }
    f
}

pub fn surface<T: Real, R: Rng + ?Sized>(space: &DiscreteSpace<T>, rng: &mut R) -> SurfaceField<T> {
    let coeffs = (0..space.n_modes())
        .map(|idx| T::lit(amplitude(space.index().degree_order(idx).0) * rng.random_range(-1.0..1.0)))
        .collect();
    SurfaceField::from_coeffs(space.l_max(), coeffs).expect("shape")
}

pub fn toroidal<T: Real, R: Rng + ?Sized>(space: &DiscreteSpace<T>, rng: &mut R) -> ToroidalField<T> {
    let mut t = ToroidalField::zeros(space);
    for idx in 1..space.n_modes() {
        let (l, m) = space.index().degree_order(idx);
        let c = profile(rng);
        let amp = amplitude(l);
        t += &ToroidalField::from_radial(space, l, m, |r| T::lit(amp * horner(&c, r.as_f64())));
    }
    t
}

/// Curl-free field with random potential and random normal traces.
pub fn curl_free<T: Real, R: Rng + ?Sized>(space: &DiscreteSpace<T>, rng: &mut R) -> VectorField<T> {
    let inner = if space.geometry().is_shell() { surface(space, rng) } else { SurfaceField::zeros(space.l_max()) };
    let outer = surface(space, rng);
    VectorField::from_parts(space, scalar(space, rng), inner, outer, ToroidalField::zeros(space)).expect("shape")
}

pub fn vector<T: Real, R: Rng + ?Sized>(space: &DiscreteSpace<T>, rng: &mut R) -> VectorField<T> {
    let mut s = curl_free(space, rng);
    s += &VectorField::toroidal_only(space, toroidal(space, rng));
    s
}

/// Unconstrained configuration pair.
pub fn pair<T: Real, R: Rng + ?Sized>(space: &DiscreteSpace<T>, rng: &mut R) -> ConfigurationPair<T> {
    ConfigurationPair { s: vector(space, rng), z: surface(space, rng) }
}

/// Element of H¹_{ℒ⁰}: curl-free, s·ν = 0 on Γ0, s·ν = −z on Γ1.
pub fn l0_pair<T: Real, R: Rng + ?Sized>(space: &DiscreteSpace<T>, rng: &mut R) -> ConfigurationPair<T> {
    let z = surface(space, rng);
    let mut w = scalar(space, rng);
    let excess = w.integrate(space) + z.integrate(space.outer_radius());
    w -= &ScalarBulkField::constant(space, excess / space.geometry().volume());
    let s = solve_div_curl(space, &w, &SurfaceField::zeros(space.l_max()), &z, &ToroidalField::zeros(space), DEFAULT_TOL_COMPAT)
        .expect("compatible by construction");
    ConfigurationPair { s, z }
}
