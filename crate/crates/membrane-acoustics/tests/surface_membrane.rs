use membrane_acoustics::membrane::{
    assemble_membrane, constant_coefficient_symbol, solve_surface_equilibrium, surface_mass,
};
use membrane_acoustics::spectral::{DiscreteSpace, Geometry, SphereGrid, SurfaceField};
use membrane_acoustics::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn space(b: f64, l_max: usize) -> DiscreteSpace<f64> {
    DiscreteSpace::new(Geometry::ball(b).unwrap(), l_max, 6).unwrap()
}

fn random_surface(l_max: usize, rng: &mut ChaCha8Rng) -> SurfaceField<f64> {
    let n = (l_max + 1) * (l_max + 1);
    SurfaceField::from_coeffs(l_max, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

#[test]
fn constant_coefficients_are_diagonal() {
    let sp = space(1.5, 6);
    let (s0, k0) = (2.0, 0.25);
    let op = assemble_membrane(&sp, &SurfaceField::constant(6, s0), &SurfaceField::constant(6, k0)).unwrap();
    let k = op.matrix();
    for i in 0..sp.n_modes() {
        let (l, _) = sp.index().degree_order(i);
        for j in 0..sp.n_modes() {
            let expected = if i == j { s0 * (l * (l + 1)) as f64 + k0 * 1.5 * 1.5 } else { 0.0 };
            assert!((k[(i, j)] - expected).abs() < 1e-11, "({i},{j})");
        }
        let strong = op.apply(&SurfaceField::harmonic(6, l, sp.index().degree_order(i).1, 1.0));
        assert!((strong.coeffs()[i] - constant_coefficient_symbol(s0, k0, 1.5, i)).abs() < 1e-11);
    }
}

#[test]
fn constants_span_the_kernel_without_stiffness() {
    let sp = space(1.0, 5);
    let op = assemble_membrane(&sp, &SurfaceField::constant(5, 1.3), &SurfaceField::zeros(5)).unwrap();
    assert!(op.kappa_zero());
    assert!(op.apply(&SurfaceField::constant(5, 7.0)).max_abs() < 1e-12);
    let h = SurfaceField::harmonic(5, 2, 1, 1.0);
    assert!(op.energy(&h) > 1.0);
}

/// Independent oracle: ∫σ∇Y_i·∇Y_j = ½∫Y_iY_jΔσ + ½(λ_i+λ_j)∫σY_iY_j on the unit sphere.
fn identity_oracle(l_max: usize, sigma: impl Fn(f64) -> f64, lap_sigma: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let g = SphereGrid::<f64>::with_size(l_max, 2 * (3 * l_max / 2 + 2), 2 * (3 * l_max + 2));
    let n = (l_max + 1) * (l_max + 1);
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let (li, _) = membrane_acoustics::spectral::degree_order(i);
        for j in 0..n {
            let (lj, _) = membrane_acoustics::spectral::degree_order(j);
            let lam = ((li * (li + 1)) + (lj * (lj + 1))) as f64;
            let mut v = 0.0;
            for q in 0..g.n_nodes() {
                let th = g.theta()[q];
                let yy = g.y()[(i, q)] * g.y()[(j, q)];
                v += g.weights()[q] * yy * (0.5 * lap_sigma(th) + 0.5 * lam * sigma(th));
            }
            out[(i, j)] = v;
        }
    }
    out
}

#[test]
fn variable_tension_matches_integration_by_parts_oracle() {
    let l_max = 8;
    let sp = space(1.0, l_max);
    let sigma = SurfaceField::from_fn(&sp, |th, _| 1.0 + 0.5 * th.cos());
    let op = assemble_membrane(&sp, &sigma, &SurfaceField::zeros(l_max)).unwrap();
    // Δ_S cosθ = −2 cosθ.
    let oracle = identity_oracle(l_max, |th| 1.0 + 0.5 * th.cos(), |th| -th.cos());
    let k = op.matrix();
    assert!((k - k.transpose()).amax() < 1e-13);
    for i in 0..sp.n_modes() {
        let (li, mi) = sp.index().degree_order(i);
        for j in 0..sp.n_modes() {
            let (lj, mj) = sp.index().degree_order(j);
            assert!((k[(i, j)] - oracle[(i, j)]).abs() < 1e-11, "({li},{mi})x({lj},{mj})");
            if mi != mj || li.abs_diff(lj) > 1 {
                assert!(k[(i, j)].abs() < 1e-11);
            }
        }
    }
}

#[test]
fn surface_equilibrium_examples() {
    let sp = space(1.0, 4);
    let one = SurfaceField::one(4);
    let op = assemble_membrane(&sp, &one, &SurfaceField::constant(4, 2.0)).unwrap();
    let z = solve_surface_equilibrium(&op, 3.0).unwrap();
    assert!((&z - &SurfaceField::constant(4, -1.5)).max_abs() < 1e-12);

    let op0 = assemble_membrane(&sp, &one, &SurfaceField::zeros(4)).unwrap();
    assert_eq!(solve_surface_equilibrium(&op0, 0.0).unwrap(), one);
    assert!(matches!(solve_surface_equilibrium(&op0, 0.5), Err(Error::NoSolution(_))));
}

#[test]
fn coefficient_validation() {
    let sp = space(1.0, 4);
    let bad_sigma = SurfaceField::from_fn(&sp, |th, _| th.cos());
    let err = assemble_membrane(&sp, &bad_sigma, &SurfaceField::zeros(4)).unwrap_err();
    assert!(matches!(&err, Error::Coefficient(m) if m.contains("min σ > 0")));
    let bad_kappa = SurfaceField::from_fn(&sp, |th, _| th.cos() - 0.5);
    let err = assemble_membrane(&sp, &SurfaceField::one(4), &bad_kappa).unwrap_err();
    assert!(matches!(&err, Error::Coefficient(m) if m.contains("κ ≥ 0")));
    assert!(matches!(
        assemble_membrane(&sp, &SurfaceField::one(3), &SurfaceField::zeros(4)),
        Err(Error::SpaceMismatch(_))
    ));
    let mut c = membrane_acoustics::coefficients::Coefficients::unit(4, 0.0, 1.0);
    assert!(c.validate(&sp).is_ok());
    c.delta = SurfaceField::from_fn(&sp, |th, _| th.cos());
    let err = c.validate(&sp).unwrap_err();
    assert!(matches!(&err, Error::Coefficient(m) if m.contains("δ ≥ 0")));
    c.delta = SurfaceField::zeros(4);
    c.mu = SurfaceField::constant(4, -1.0);
    assert!(c.validate(&sp).is_err());
}

#[test]
fn variable_coefficient_equilibrium_has_small_weak_residual() {
    let l_max = 16;
    let sp = space(1.2, l_max);
    let sigma = SurfaceField::from_fn(&sp, |th, ph| 1.0 + 0.3 * th.sin() * ph.cos());
    let kappa = SurfaceField::from_fn(&sp, |th, _| 0.5 + 0.25 * th.cos().powi(2));
    let op = assemble_membrane(&sp, &sigma, &kappa).unwrap();
    let p0 = 1.7;
    let z = solve_surface_equilibrium(&op, p0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let psi = random_surface(l_max, &mut rng);
        let scale = op.energy(&z).abs().max(1.0) * psi.coeff_norm().max(1.0);
        assert!(op.weak_residual(&z, p0, &psi).abs() < 1e-10 * scale);
    }
}

#[test]
fn surface_mass_of_constant_is_scaled_identity() {
    let sp = space(2.0, 5);
    let m = surface_mass(&sp, &SurfaceField::constant(5, 0.5)).unwrap();
    assert!((m - DMatrix::identity(36, 36) * 2.0).amax() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn membrane_energy_is_nonnegative(seed in 0u64..10_000, amp in 0.0f64..0.9) {
        let sp = space(1.0, 6);
        let sigma = SurfaceField::from_fn(&sp, move |th, ph| 1.0 + amp * (th.sin() * ph.sin()));
        let op = assemble_membrane(&sp, &sigma, &SurfaceField::zeros(6)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_surface(6, &mut rng);
        prop_assert!(op.energy(&z) >= -1e-12);
        // constants carry no stiffness energy
        let mut zc = z.clone();
        zc.coeffs_mut()[0] += 3.0;
        prop_assert!((op.energy(&zc) - op.energy(&z)).abs() < 1e-10 * (1.0 + op.energy(&z)));
    }
}
