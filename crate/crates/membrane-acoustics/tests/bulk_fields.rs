use std::f64::consts::PI;

use membrane_acoustics::bulk::{
    divergence, normal_trace, solve_div_curl, solve_neumann_poisson, ScalarBulkField, ToroidalField, VectorField,
    DEFAULT_TOL_COMPAT,
};
use membrane_acoustics::spectral::{Boundary, DiscreteSpace, Geometry, SurfaceField};
use membrane_acoustics::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = DEFAULT_TOL_COMPAT;
const SQRT_4PI: f64 = 3.5449077018110318;

fn ball(l_max: usize, n_r: usize) -> DiscreteSpace<f64> {
    DiscreteSpace::new(Geometry::ball(1.0).unwrap(), l_max, n_r).unwrap()
}

fn shell(l_max: usize, n_r: usize) -> DiscreteSpace<f64> {
    DiscreteSpace::new(Geometry::shell(0.5, 1.0).unwrap(), l_max, n_r).unwrap()
}

/// Symbolic radial Laplacian of r^k Y_l: (k(k+1) − l(l+1)) r^{k−2}.
fn laplacian_monomial(k: i32, l: usize, r: f64) -> f64 {
    ((k * (k + 1)) as f64 - (l * (l + 1)) as f64) * r.powi(k - 2)
}

fn random_poly(rng: &mut ChaCha8Rng, deg: usize) -> Vec<f64> {
    (0..=deg).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn eval_poly(c: &[f64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * r + ck)
}

fn random_scalar(space: &DiscreteSpace<f64>, rng: &mut ChaCha8Rng) -> ScalarBulkField<f64> {
    let mut f = ScalarBulkField::zeros(space);
    for idx in 0..space.n_modes() {
        let (l, _) = space.index().degree_order(idx);
        let c = random_poly(rng, 4);
        for (x, &r) in f.mode_mut(idx).iter_mut().zip(space.radial_nodes()) {
            *x = r.powi(l as i32) * eval_poly(&c, r);
        }
    }
    f
}

fn random_surface(space: &DiscreteSpace<f64>, rng: &mut ChaCha8Rng) -> SurfaceField<f64> {
    let c = (0..space.n_modes()).map(|_| rng.random_range(-1.0..1.0)).collect();
    SurfaceField::from_coeffs(space.l_max(), c).unwrap()
}

fn random_toroidal(space: &DiscreteSpace<f64>, rng: &mut ChaCha8Rng) -> ToroidalField<f64> {
    let mut t = ToroidalField::zeros(space);
    for idx in 1..space.n_modes() {
        let c = random_poly(rng, 3);
        let (l, m) = space.index().degree_order(idx);
        t += &ToroidalField::from_radial(space, l, m, |r| eval_poly(&c, r));
    }
    t
}

fn random_vector(space: &DiscreteSpace<f64>, rng: &mut ChaCha8Rng) -> VectorField<f64> {
    let inner = if space.geometry().is_shell() { random_surface(space, rng) } else { SurfaceField::zeros(space.l_max()) };
    VectorField::from_parts(space, random_scalar(space, rng), inner, random_surface(space, rng), random_toroidal(space, rng)).unwrap()
}

#[test]
fn divergence_of_position_over_three_is_one() {
    for space in [ball(3, 10), shell(3, 10)] {
        let s = VectorField::position(&space, 1.0 / 3.0);
        let d = divergence(&space, &s).unwrap();
        for (j, x) in d.mode(0).iter().enumerate() {
            assert!((x - SQRT_4PI).abs() < 1e-10, "node {j}: {x}");
        }
        assert!(d.data()[space.n_r()..].iter().all(|x| x.abs() < 1e-10));
    }
}

#[test]
fn divergence_matches_symbolic_laplacian() {
    let space = ball(3, 12);
    let idx = space.index().index(2, 0);
    let phi = ScalarBulkField::from_radial(&space, 2, 0, |r| r.powi(3));
    let d = divergence(&space, &VectorField::gradient(&space, &phi)).unwrap();
    for (j, &r) in space.radial_nodes().iter().enumerate() {
        let got = d.data()[idx * space.n_r() + j];
        assert!((got - laplacian_monomial(3, 2, r)).abs() < 1e-9, "{got} at r={r}");
        assert!((laplacian_monomial(3, 2, r) - 6.0 * r).abs() < 1e-14);
    }
    let sh = shell(3, 24);
    let phi = ScalarBulkField::from_radial(&sh, 3, -2, |r| r.powi(5) + r.powi(-4));
    let d = divergence(&sh, &VectorField::gradient(&sh, &phi)).unwrap();
    let idx = sh.index().index(3, -2);
    for (j, &r) in sh.radial_nodes().iter().enumerate() {
        let exact = laplacian_monomial(5, 3, r) + laplacian_monomial(-4, 3, r);
        let got = d.data()[idx * sh.n_r() + j];
        assert!((got - exact).abs() < 1e-6 * exact.abs().max(1.0), "{j}: {got} vs {exact}");
    }
}

#[test]
fn toroidal_fields_are_solenoidal_and_tangent() {
    let space = shell(4, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = random_toroidal(&space, &mut rng);
    let s = VectorField::toroidal_only(&space, t);
    assert!(divergence(&space, &s).unwrap().max_abs() == 0.0);
    assert!(normal_trace(&space, &s, Boundary::Gamma0).unwrap().max_abs() == 0.0);
    assert!(normal_trace(&space, &s, Boundary::Gamma1).unwrap().max_abs() == 0.0);
}

#[test]
fn toroidal_surface_divergence_vanishes_by_quadrature() {
    // T = (1/sinθ ∂φ t) θ̂ − (∂θ t) φ̂ on each sphere; its weak surface divergence
    // against every harmonic is a Jacobian integral, zero by symmetry.
    let space = ball(6, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = space.sphere();
    let mut c = vec![0.0; space.n_modes()];
    for x in c.iter_mut().skip(1) {
        *x = rng.random_range(-1.0..1.0);
    }
    let cv = nalgebra::DVector::from_vec(c);
    let t_theta = g.dtheta().transpose() * &cv;
    let t_phi = g.dphi().transpose() * &cv;
    for k in 0..space.n_modes() {
        let res: f64 = (0..g.n_nodes())
            .map(|n| g.weights()[n] * (t_phi[n] * g.dtheta()[(k, n)] - t_theta[n] * g.dphi()[(k, n)]))
            .sum();
        assert!(res.abs() < 1e-10, "mode {k}: {res}");
    }
}

#[test]
fn normal_trace_examples() {
    let b = ball(2, 8);
    let x = VectorField::position(&b, 1.0);
    let tr = normal_trace(&b, &x, Boundary::Gamma1).unwrap();
    assert!((&tr - &SurfaceField::one(2)).max_abs() < 1e-12);
    assert!(matches!(normal_trace(&b, &x, Boundary::Gamma0), Err(Error::Geometry(_))));
    let sh = shell(2, 8);
    let x = VectorField::position(&sh, 1.0);
    let tr0 = normal_trace(&sh, &x, Boundary::Gamma0).unwrap();
    assert!((&tr0 - &SurfaceField::constant(2, -0.5)).max_abs() < 1e-12);
    let grad = VectorField::gradient(&sh, &ScalarBulkField::from_radial(&sh, 1, 1, |r| r * r));
    assert!(grad.is_curl_free());
}

#[test]
fn neumann_examples() {
    let space = ball(2, 8);
    let w = ScalarBulkField::constant(&space, 3.0);
    let g1 = SurfaceField::constant(2, -1.0);
    let z0 = SurfaceField::zeros(2);
    let phi = solve_neumann_poisson(&space, &w, &z0, &g1, TOL).unwrap();
    let expected = ScalarBulkField::from_radial(&space, 0, 0, |r| -0.5 * r * r * SQRT_4PI).pinned(&space);
    assert!((&phi - &expected).max_abs() < 1e-12);

    let zero = solve_neumann_poisson(&space, &ScalarBulkField::zeros(&space), &z0, &z0, TOL).unwrap();
    assert_eq!(zero.max_abs(), 0.0);
}

#[test]
fn neumann_manufactured_solution() {
    let c = 0.7;
    for space in [ball(2, 10), shell(2, 10)] {
        let (a, b) = (space.inner_radius(), space.outer_radius());
        let exact = ScalarBulkField::from_radial(&space, 1, 0, |r| r.powi(3) - c * r);
        // −Δ[(r³ − c r) Y10] = −10 r Y10.
        let w = ScalarBulkField::from_radial(&space, 1, 0, |r| -(laplacian_monomial(3, 1, r) - c * laplacian_monomial(1, 1, r)));
        let g1 = SurfaceField::harmonic(2, 1, 0, 3.0 * b * b - c);
        let g0 = if space.geometry().is_shell() { SurfaceField::harmonic(2, 1, 0, -(3.0 * a * a - c)) } else { SurfaceField::zeros(2) };
        let phi = solve_neumann_poisson(&space, &w, &g0, &g1, TOL).unwrap();
        assert!((&phi - &exact).max_abs() < 1e-8, "{:e}", (&phi - &exact).max_abs());
    }
}

#[test]
fn neumann_rejects_incompatible_data() {
    let space = ball(2, 8);
    let w = ScalarBulkField::constant(&space, 1.0);
    let z = SurfaceField::zeros(2);
    assert!(matches!(solve_neumann_poisson(&space, &w, &z, &z, TOL), Err(Error::Compatibility { .. })));
    assert!(matches!(
        solve_neumann_poisson(&space, &ScalarBulkField::zeros(&space), &SurfaceField::one(2), &z, TOL),
        Err(Error::Geometry(_))
    ));
}

#[test]
fn div_curl_examples() {
    let space = ball(3, 8);
    let z0 = SurfaceField::zeros(3);
    let none = ToroidalField::zeros(&space);
    let s = solve_div_curl(&space, &ScalarBulkField::constant(&space, 3.0), &z0, &SurfaceField::constant(3, -1.0), &none, TOL).unwrap();
    let err = (&s - &VectorField::position(&space, 1.0)).max_abs();
    assert!(err < 1e-10, "{err:e}");

    let t = ToroidalField::from_radial(&space, 2, 1, |r| r * r - 0.3);
    let s = solve_div_curl(&space, &ScalarBulkField::zeros(&space), &z0, &z0, &t, TOL).unwrap();
    assert!((&s - &VectorField::toroidal_only(&space, t)).max_abs() < 1e-14);

    let vol = space.geometry().volume();
    let area = space.geometry().area_gamma1();
    let s = solve_div_curl(&space, &ScalarBulkField::constant(&space, -1.0), &z0, &SurfaceField::constant(3, vol / area), &none, TOL).unwrap();
    assert!((&s - &VectorField::position(&space, -1.0 / 3.0)).max_abs() < 1e-12);
    let d = divergence(&space, &s).unwrap();
    assert!((&d - &ScalarBulkField::constant(&space, -1.0)).max_abs() < 1e-10);
    assert!((&s.trace_outer().clone() - &SurfaceField::constant(3, -1.0 / 3.0)).max_abs() < 1e-12);
}

#[test]
fn divergence_theorem_on_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for space in [ball(4, 10), shell(4, 10)] {
        let (a, b) = (space.inner_radius(), space.outer_radius());
        for _ in 0..100 {
            let s = random_vector(&space, &mut rng);
            let lhs = divergence(&space, &s).unwrap().integrate(&space);
            let rhs = s.trace_outer().integrate(b) + s.trace_inner().integrate(a);
            assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn div_curl_reproduces_its_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for space in [ball(4, 12), shell(4, 12)] {
        let (a, b) = (space.inner_radius(), space.outer_radius());
        for _ in 0..40 {
            let mut w = random_scalar(&space, &mut rng);
            let z0 = if space.geometry().is_shell() { random_surface(&space, &mut rng) } else { SurfaceField::zeros(4) };
            let z1 = random_surface(&space, &mut rng);
            let t = random_toroidal(&space, &mut rng);
            let excess = w.integrate(&space) + z0.integrate(a) + z1.integrate(b);
            w = &w - &ScalarBulkField::constant(&space, excess / space.geometry().volume());
            let s = solve_div_curl(&space, &w, &z0, &z1, &t, TOL).unwrap();
            let d = divergence(&space, &s).unwrap();
            assert!((&d - &w).max_abs() < 1e-8);
            assert!((&normal_trace(&space, &s, Boundary::Gamma1).unwrap() + &z1).max_abs() < 1e-12);
            if space.geometry().is_shell() {
                assert!((&normal_trace(&space, &s, Boundary::Gamma0).unwrap() + &z0).max_abs() < 1e-12);
            }
            assert_eq!(s.toroidal(), &t);
        }
    }
}

#[test]
fn gradient_traces_follow_the_potential() {
    let space = shell(2, 9);
    // φ = r² Y_00 √4π / 2 → ∂νφ = b on Γ1 and −a on Γ0.
    let x = VectorField::position(&space, 1.0);
    assert!((x.trace_outer().mean() - 1.0).abs() < 1e-12);
    assert!((x.trace_inner().mean() + 0.5).abs() < 1e-12);
    assert!((x.norm_l2_sq(&space) - 4.0 * PI * (1.0 - 0.5f64.powi(5)) / 5.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn divergence_is_linear(seed in 0u64..10_000, alpha in -3.0f64..3.0) {
        let space = shell(3, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_vector(&space, &mut rng);
        let q = random_vector(&space, &mut rng);
        let combo = &s + &q.scale(alpha);
        let lhs = divergence(&space, &combo).unwrap();
        let rhs = &divergence(&space, &s).unwrap() + &divergence(&space, &q).unwrap().scale(alpha);
        prop_assert!((&lhs - &rhs).max_abs() < 1e-9 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn solved_potentials_have_zero_mean(seed in 0u64..10_000) {
        let space = ball(3, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z1 = random_surface(&space, &mut rng);
        let w = ScalarBulkField::constant(&space, -z1.integrate(1.0) / space.geometry().volume());
        let phi = solve_neumann_poisson(&space, &w, &SurfaceField::zeros(3), &z1, TOL).unwrap();
        prop_assert!(phi.mean(&space).abs() < 1e-12);
    }
}
