#![allow(dead_code)]

use membrane_acoustics::bulk::{solve_div_curl, ScalarBulkField, ToroidalField, DEFAULT_TOL_COMPAT};
use membrane_acoustics::coefficients::Coefficients;
use membrane_acoustics::equilibria::{special_equilibrium, ConfigurationPair, SpecialEquilibrium};
use membrane_acoustics::membrane::MembraneOperator;
use membrane_acoustics::sampling;
use membrane_acoustics::spectral::{DiscreteSpace, Geometry, SurfaceField};
use rand::Rng;

pub fn ball(l_max: usize, n_r: usize) -> DiscreteSpace<f64> {
    DiscreteSpace::new(Geometry::ball(1.0).unwrap(), l_max, n_r).unwrap()
}

pub fn shell(l_max: usize, n_r: usize) -> DiscreteSpace<f64> {
    DiscreteSpace::new(Geometry::shell(0.5, 1.0).unwrap(), l_max, n_r).unwrap()
}

pub struct Setup {
    pub space: DiscreteSpace<f64>,
    pub coeffs: Coefficients<f64>,
    pub op: MembraneOperator<f64>,
    pub eq: SpecialEquilibrium<f64>,
}

impl Setup {
    pub fn new(space: DiscreteSpace<f64>, coeffs: Coefficients<f64>) -> Self {
        coeffs.validate(&space).unwrap();
        let op = coeffs.membrane(&space).unwrap();
        let eq = special_equilibrium(&space, &op, coeffs.bulk).unwrap();
        Self { space, coeffs, op, eq }
    }

    /// κ ≡ 0 with variable tension.
    pub fn free(space: DiscreteSpace<f64>) -> Self {
        let mut c = Coefficients::unit(space.l_max(), 0.0, 0.0);
        c.sigma = SurfaceField::from_fn(&space, |th, _| 1.0 + 0.5 * th.cos());
        Self::new(space, c)
    }

    /// κ ≢ 0 with variable tension and stiffness.
    pub fn stiff(space: DiscreteSpace<f64>) -> Self {
        let mut c = Coefficients::unit(space.l_max(), 0.0, 1.0);
        c.bulk = 1.5;
        c.sigma = SurfaceField::from_fn(&space, |th, ph| 1.0 + 0.3 * th.sin() * ph.cos());
        c.kappa = SurfaceField::from_fn(&space, |th, _| 1.0 + 0.5 * th.cos());
        Self::new(space, c)
    }
}

/// Random element of H¹_{ℒ⁰}: curl-free, s·ν = 0 on Γ0, s·ν = −z on Γ1.
pub fn l0_element<R: Rng>(space: &DiscreteSpace<f64>, rng: &mut R) -> ConfigurationPair<f64> {
    let z = sampling::surface(space, rng);
    let mut w = sampling::scalar(space, rng);
    let excess = w.integrate(space) + z.integrate(space.outer_radius());
    w -= &ScalarBulkField::constant(space, excess / space.geometry().volume());
    let s = solve_div_curl(space, &w, &SurfaceField::zeros(space.l_max()), &z, &ToroidalField::zeros(space), DEFAULT_TOL_COMPAT)
        .unwrap();
    ConfigurationPair { s, z }
}

pub fn assert_close(a: &ConfigurationPair<f64>, b: &ConfigurationPair<f64>, tol: f64, what: &str) {
    let d = (a - b).max_abs();
    assert!(d <= tol * (1.0 + b.max_abs()), "{what}: difference {d:e}");
}
