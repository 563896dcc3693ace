mod common;

use std::f64::consts::PI;

use common::{ball, shell, Setup};
use membrane_acoustics::bulk::{ScalarBulkField, VectorField};
use membrane_acoustics::coefficients::Coefficients;
use membrane_acoustics::dynamics::{
    assemble_generator, conserved_quantities, dispersion_roots, dissipation_integral, energy, generator_eigenvalues,
    spherical_bessel, step_midpoint, weak_residual, InitialState, LagrangianState, Model, ModeParameters, ModelTag,
    PotentialState, ReferenceOracle, TimeConfig,
};
use membrane_acoustics::equilibria::{constraint_l, project_structural, LagrangianModel};
use membrane_acoustics::sampling;
use membrane_acoustics::spectral::{DiscreteSpace, SurfaceField};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_potential(space: &DiscreteSpace<f64>, seed: u64) -> PotentialState<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PotentialState {
        u: sampling::scalar(space, &mut rng),
        v: sampling::surface(space, &mut rng),
        u_t: sampling::scalar(space, &mut rng),
        v_t: sampling::surface(space, &mut rng),
        t: 0.0,
    }
}

fn damped(space: &DiscreteSpace<f64>) -> Coefficients<f64> {
    let mut c = Setup::stiff(ball(space.l_max(), 4)).coeffs;
    c.delta = SurfaceField::from_fn(space, |th, _| 0.5 + 0.25 * th.cos());
    c
}

#[test]
fn zero_state_stays_zero() {
    let space = ball(3, 10);
    let c = damped(&space);
    let gen = assemble_generator(&space, &c).unwrap();
    let x = step_midpoint(&gen, &PotentialState::zeros(&space), 1e-3).unwrap();
    assert_eq!(x.max_abs(), 0.0);
    let oracle = ReferenceOracle::new(&space, &c).unwrap();
    assert_eq!(oracle.propagate(&PotentialState::zeros(&space), 0.01, 1e-3).unwrap().max_abs(), 0.0);
}

#[test]
fn undamped_energy_is_conserved() {
    for space in [ball(4, 14), shell(4, 14)] {
        let mut c = Setup::stiff(ball(4, 4)).coeffs;
        c.delta = SurfaceField::zeros(4);
        let model = Model::new(&space, &c).unwrap();
        let x = random_potential(&space, 3);
        let traj = model
            .simulate(ModelTag::Potential { constrained: false }, &InitialState::Potential(x), TimeConfig::new(2.0, 1e-3, 100))
            .unwrap();
        let e = traj.energies();
        let drift = (e[e.len() - 1] - e[0]).abs() / e[0];
        assert!(drift <= 1e-10, "energy drift {drift:e}");
        assert_eq!(traj.diagnostics.last().unwrap().dissipation_cum, 0.0);
    }
}

#[test]
fn damped_energy_identity_and_monotonicity() {
    let space = shell(3, 12);
    let c = damped(&space);
    let model = Model::new(&space, &c).unwrap();
    let x = random_potential(&space, 4);
    let traj = model
        .simulate(ModelTag::Potential { constrained: false }, &InitialState::Potential(x), TimeConfig::new(1.0, 1e-3, 1))
        .unwrap();
    let e = traj.energies();
    assert!(traj.max_energy_defect <= 1e-9 * e[0], "defect {:e}", traj.max_energy_defect);
    assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-13 * e[0]));
    let diss = dissipation_integral(&traj, 0.0, 1.0).unwrap();
    assert!(diss > 0.0);
    assert!((e[0] - e[e.len() - 1] - diss).abs() <= 1e-9 * e[0]);
    let mid = dissipation_integral(&traj, 0.25, 0.5).unwrap();
    let i = traj.index_of(0.25).unwrap();
    let j = traj.index_of(0.5).unwrap();
    assert!((e[i] - e[j] - mid).abs() <= 1e-9 * e[0]);
    assert!(dissipation_integral(&traj, 0.0, 2.0).is_err());
    assert!(dissipation_integral(&traj, 0.5, 0.25).is_err());
}

#[test]
fn generator_is_skew_in_the_energy_product() {
    let space = ball(3, 10);
    let mut c = Setup::stiff(ball(3, 4)).coeffs;
    c.delta = SurfaceField::zeros(3);
    let gen = assemble_generator(&space, &c).unwrap();
    assert!(!gen.is_mode_diagonal());
    for seed in 0..5 {
        let x = random_potential(&space, 10 + seed);
        let y = random_potential(&space, 20 + seed);
        let s = gen.energy_inner(&gen.apply(&x), &y) + gen.energy_inner(&x, &gen.apply(&y));
        let scale = gen.energy(&x).sqrt() * gen.energy(&gen.apply(&y)).sqrt() + gen.energy(&y).sqrt() * gen.energy(&gen.apply(&x)).sqrt();
        assert!(s.abs() <= 1e-10 * scale, "skew defect {:e}", s.abs() / scale);
    }
}

#[test]
fn constant_coefficients_decouple_and_constants_are_neutral() {
    let space = ball(3, 10);
    let c = Coefficients::unit(3, 0.5, 0.0);
    let gen = assemble_generator(&space, &c).unwrap();
    assert!(gen.is_mode_diagonal());
    let oracle = ReferenceOracle::new(&space, &c).unwrap();
    assert_eq!(oracle.n_blocks(), space.n_modes());
    let mut x = PotentialState::zeros(&space);
    x.u = ScalarBulkField::constant(&space, 2.0);
    let dx = gen.apply(&x);
    assert!(dx.max_abs() <= 1e-9, "{:e}", dx.max_abs());
    let y = step_midpoint(&gen, &x, 1e-2).unwrap();
    assert!((&y.u - &x.u).max_abs() <= 1e-11);
}

#[test]
fn energy_examples() {
    let space = ball(2, 8);
    let c = Coefficients::unit(2, 0.0, 0.0);
    assert_eq!(energy(&space, &c, &LagrangianState::zeros(&space)).unwrap(), 0.0);
    let z = ScalarBulkField::from_radial(&space, 1, 0, |r| r * (4.0 * PI / 3.0).sqrt());
    let state = LagrangianState { r_t: VectorField::gradient(&space, &z), ..LagrangianState::zeros(&space) };
    let e = energy(&space, &c, &state).unwrap();
    assert!((e - 0.5 * 4.0 * PI / 3.0).abs() <= 1e-12, "{e}");

    // (s*, z*) for constant κ: ½B|Ω| + ½κ(B/κ)²|Γ1|.
    let (bulk, kappa) = (1.5, 2.0);
    let c = Coefficients::constant(2, 1.0, bulk, 1.0, 1.0, 0.0, kappa);
    let model = Model::new(&space, &c).unwrap();
    let rest = LagrangianState::at_rest(&space, &model.special().pair());
    let e = model.lagrangian_energy(&rest).unwrap();
    let expect = 0.5 * bulk * 4.0 * PI / 3.0 + 0.5 * kappa * (bulk / kappa).powi(2) * 4.0 * PI;
    assert!((e - expect).abs() <= 1e-10 * expect, "{e} vs {expect}");

    // Variable coefficients: the same energy on a finer truncation.
    let fine = ball(2, 16);
    let s = Setup::stiff(ball(2, 4));
    let e0 = Model::new(&space, &s.coeffs).unwrap();
    let e1 = Model::new(&fine, &s.coeffs).unwrap();
    let a = e0.lagrangian_energy(&LagrangianState::at_rest(&space, &e0.special().pair())).unwrap();
    let b = e1.lagrangian_energy(&LagrangianState::at_rest(&fine, &e1.special().pair())).unwrap();
    assert!((a - b).abs() <= 1e-10 * b, "{a} vs {b}");
}

#[test]
fn stationary_equilibrium_trajectory() {
    for s in [Setup::stiff(ball(3, 10)), Setup::free(shell(3, 10))] {
        let mut c = s.coeffs.clone();
        c.delta = SurfaceField::constant(3, 0.7);
        let model = Model::new(&s.space, &c).unwrap();
        let rest = LagrangianState::at_rest(&s.space, &model.special().pair());
        let traj = model
            .simulate(ModelTag::Lagrangian(LagrangianModel::Full), &InitialState::Lagrangian(rest.clone()), TimeConfig::new(0.2, 1e-3, 20))
            .unwrap();
        let states = traj.states.lagrangian().unwrap();
        for x in states {
            assert!(x.v_t.max_abs() <= 1e-12 && x.r_t.max_abs() <= 1e-12);
            assert!((&x.configuration() - &rest.configuration()).max_abs() <= 1e-10);
        }
        let e = traj.energies();
        assert!(e.iter().all(|&x| (x - e[0]).abs() <= 1e-12 * e[0].max(1.0)));
        assert!(conserved_quantities(&s.space, &traj).unwrap().max() <= 1e-10);
        let model_ref = &model;
        let rep = weak_residual(model_ref, &traj, 5, 1).unwrap();
        assert!(rep.max_relative() <= 1e-8, "{:e}", rep.max_relative());
    }
}

fn l0_initial(space: &DiscreteSpace<f64>, seed: u64) -> LagrangianState<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = common::l0_element(space, &mut rng);
    LagrangianState {
        r: p.s,
        v: p.z,
        r_t: VectorField::gradient(space, &sampling::scalar(space, &mut rng)),
        v_t: sampling::surface(space, &mut rng),
        t: 0.0,
    }
}

#[test]
fn l0_runs_keep_l_zero_and_conserve() {
    let s = Setup::stiff(shell(3, 12));
    let model = Model::new(&s.space, &s.coeffs).unwrap();
    let x = l0_initial(&s.space, 5);
    let traj = model
        .simulate(ModelTag::Lagrangian(LagrangianModel::L0), &InitialState::Lagrangian(x), TimeConfig::new(0.5, 1e-3, 50))
        .unwrap();
    for d in &traj.diagnostics {
        assert!(d.l_value.abs() <= 1e-10, "L = {:e}", d.l_value);
    }
    let drift = conserved_quantities(&s.space, &traj).unwrap();
    assert!(drift.max() <= 1e-9, "{drift:?}");
    assert!(traj.states.lagrangian().unwrap().iter().all(|x| x.r_t.is_curl_free()));
}

#[test]
fn membership_is_enforced() {
    let s = Setup::free(ball(2, 8));
    let model = Model::new(&s.space, &s.coeffs).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = sampling::pair(&s.space, &mut rng);
    let x = LagrangianState { r: p.s, v: p.z, ..LagrangianState::zeros(&s.space) };
    let time = TimeConfig::new(0.01, 1e-3, 1);
    assert!(model.simulate(ModelTag::Lagrangian(LagrangianModel::L0), &InitialState::Lagrangian(x.clone()), time).is_err());
    assert!(model.simulate(ModelTag::Lagrangian(LagrangianModel::Full), &InitialState::Lagrangian(x.clone()), time).is_ok());
    let mut bad = x.clone();
    bad.r_t = VectorField::toroidal_only(&s.space, sampling::toroidal(&s.space, &mut rng));
    assert!(model.simulate(ModelTag::Lagrangian(LagrangianModel::Full), &InitialState::Lagrangian(bad), time).is_err());
    let y = random_potential(&s.space, 9);
    assert!(model.simulate(ModelTag::Potential { constrained: true }, &InitialState::Potential(y.clone()), time).is_err());
    assert!(model.simulate(ModelTag::Eulerian { constrained: false }, &InitialState::Potential(y), time).is_err());
}

/// The (x/3, 0) data: ℓ = 1/3 when κ ≡ 0 on the unit ball.
#[test]
fn structural_decomposition_of_solutions() {
    let space = ball(3, 12);
    let mut c = Coefficients::unit(3, 0.4, 0.0);
    c.sigma = SurfaceField::from_fn(&space, |th, _| 1.0 + 0.25 * th.cos());
    let model = Model::new(&space, &c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = LagrangianState {
        r: VectorField::position(&space, 1.0 / 3.0),
        v: SurfaceField::zeros(3),
        r_t: VectorField::gradient(&space, &sampling::scalar(&space, &mut rng)),
        v_t: sampling::surface(&space, &mut rng),
        t: 0.0,
    };
    let lam = constraint_l(&space, &x.configuration()).unwrap() / model.special().l_value;
    assert!((lam - 1.0 / 3.0).abs() <= 1e-12);
    let time = TimeConfig::new(1.0, 1e-3, 100);
    let full = model.simulate(ModelTag::Lagrangian(LagrangianModel::Full), &InitialState::Lagrangian(x.clone()), time).unwrap();
    let (onto_e, onto_l0) = project_structural(&space, &x.configuration(), model.special()).unwrap();
    let y = LagrangianState { r: onto_l0.s, v: onto_l0.z, ..x.clone() };
    let core = model.simulate(ModelTag::Lagrangian(LagrangianModel::L0), &InitialState::Lagrangian(y), time).unwrap();
    let (a, b) = (full.states.lagrangian().unwrap(), core.states.lagrangian().unwrap());
    assert_eq!(a.len(), 11);
    for (p, q) in a.iter().zip(b) {
        let d = &p.configuration() - &(&q.configuration() + &onto_e);
        assert!(d.max_abs() <= 1e-8, "{:e}", d.max_abs());
        assert!((&p.r_t - &q.r_t).max_abs() <= 1e-8 && (&p.v_t - &q.v_t).max_abs() <= 1e-8);
    }
}

fn slow_coefficients(l_max: usize) -> Coefficients<f64> {
    Coefficients::constant(l_max, 1.0, 0.01, 1.0, 0.02, 0.1, 0.05)
}

fn smooth_potential(space: &DiscreteSpace<f64>) -> PotentialState<f64> {
    let mut x = PotentialState::zeros(space);
    // Radial profiles with ∂_r u = 0 at r = 1, matching v_t = 0.
    x.u = &ScalarBulkField::from_radial(space, 1, 0, |r| r * (1.0 - r * r / 3.0))
        + &ScalarBulkField::from_radial(space, 0, 0, |r: f64| r * r - 0.5 * r.powi(4));
    x.v = SurfaceField::harmonic(space.l_max(), 2, 1, 0.3);
    x
}

fn state_norm(space: &DiscreteSpace<f64>, x: &PotentialState<f64>) -> f64 {
    (x.u.dot_l2(space, &x.u) + x.u_t.dot_l2(space, &x.u_t) + x.v.dot(&x.v) + x.v_t.dot(&x.v_t)).sqrt()
}

fn diff(a: &PotentialState<f64>, b: &PotentialState<f64>) -> PotentialState<f64> {
    PotentialState { u: &a.u - &b.u, v: &a.v - &b.v, u_t: &a.u_t - &b.u_t, v_t: &a.v_t - &b.v_t, t: a.t }
}

#[test]
fn engine_matches_reference_oracle() {
    let space = ball(2, 16);
    let c = slow_coefficients(2);
    let x = smooth_potential(&space);
    let model = Model::new(&space, &c).unwrap();
    let traj = model
        .simulate(ModelTag::Potential { constrained: false }, &InitialState::Potential(x.clone()), TimeConfig::new(0.2, 1e-3, 200))
        .unwrap();
    let end = traj.states.potential().unwrap().last().unwrap();
    let oracle = ReferenceOracle::new(&space, &c).unwrap();
    let r = oracle.propagate(&x, 0.2, 1e-4).unwrap();
    let err = state_norm(&space, &diff(end, &r)) / state_norm(&space, &r);
    assert!(err <= 1e-6, "engine vs oracle {err:e}");
    assert!(ReferenceOracle::new(&ball(5, 8), &Coefficients::unit(5, 0.0, 0.0)).is_err());
    assert!(ReferenceOracle::new(&ball(2, 40), &Coefficients::unit(2, 0.0, 0.0)).is_err());
}

#[test]
fn bessel_closed_forms() {
    for z in [Complex64::new(0.3, 0.1), Complex64::new(4.0, -1.5), Complex64::new(12.0, 0.7)] {
        let j = spherical_bessel(3, z);
        let j0 = z.sin() / z;
        let j1 = z.sin() / (z * z) - z.cos() / z;
        let j2 = (3.0 / (z * z) - 1.0) * z.sin() / z - 3.0 * z.cos() / (z * z);
        for (a, b) in [(j[0], j0), (j[1], j1), (j[2], j2)] {
            assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()), "{a} vs {b} at {z}");
        }
    }
}

#[test]
fn dispersion_roots_match_generator_spectrum() {
    let space = ball(2, 40);
    for delta in [0.0, 1.0] {
        let c = Coefficients::constant(2, 1.0, 1.0, 1.0, 1.0, delta, 1.0);
        let params = ModeParameters::from_coefficients(&c, space.geometry()).unwrap();
        let gen = assemble_generator(&space, &c).unwrap();
        for l in 0..=2 {
            let roots = dispersion_roots(&params, l, 3).unwrap();
            let eig = generator_eigenvalues(&gen, l).unwrap();
            for w in roots.iter().take(3) {
                assert!(params.relative_residual(l, *w) <= 1e-10);
                if delta == 0.0 {
                    assert!(w.im.abs() <= 1e-9 * w.norm(), "root {w} not real");
                } else {
                    assert!(w.im > 0.0, "root {w} is not damped in the e^(iωt) convention");
                }
                let lam = Complex64::i() * w;
                let best = eig.iter().map(|e| (e - lam).norm()).fold(f64::INFINITY, f64::min);
                assert!(best <= 1e-6 * lam.norm(), "l = {l}: root {w}, nearest eigenvalue off by {best:e}");
            }
        }
    }
}

#[test]
fn weak_residuals_of_engine_runs() {
    let s = Setup::stiff(ball(3, 12));
    let mut c = s.coeffs.clone();
    c.delta = SurfaceField::constant(3, 0.5);
    let model = Model::new(&s.space, &c).unwrap();
    let dt = 1e-3;
    let time = TimeConfig::new(0.3, dt, 1);
    let lag = model.simulate(ModelTag::Lagrangian(LagrangianModel::L0), &InitialState::Lagrangian(l0_initial(&s.space, 6)), time).unwrap();
    let rep = weak_residual(&model, &lag, 20, 7).unwrap();
    assert!(rep.max_relative() <= 5.0 * dt * dt + 1e-8, "clean {:e}", rep.max_relative());
    let mut bad = lag.clone();
    if let membrane_acoustics::dynamics::States::Lagrangian(xs) = &mut bad.states {
        for x in xs {
            x.v = x.v.scale(1.01);
        }
    }
    let rb = weak_residual(&model, &bad, 20, 7).unwrap();
    assert!(rb.max_relative() >= 100.0 * rep.max_relative().max(1e-8), "corrupted {:e}", rb.max_relative());

    let pot = model
        .simulate(ModelTag::Potential { constrained: false }, &InitialState::Potential(random_potential(&s.space, 1)), time)
        .unwrap();
    let rep = weak_residual(&model, &pot, 10, 3).unwrap();
    assert!(rep.max_relative() <= 5.0 * dt * dt + 1e-8, "potential {:e}", rep.max_relative());
    let mut eul0 = model.eulerian_from_potential(&random_potential(&s.space, 2)).unwrap();
    eul0.t = 0.0;
    let eul = model.simulate(ModelTag::Eulerian { constrained: false }, &InitialState::Eulerian(eul0), time).unwrap();
    let rep = weak_residual(&model, &eul, 10, 4).unwrap();
    assert!(rep.max_relative() <= 5.0 * dt * dt + 1e-8, "eulerian {:e}", rep.max_relative());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn midpoint_energy_identity_holds(seed in 0u64..1000, delta in 0.0f64..2.0, dt in 1e-3f64..5e-2) {
        let space = ball(2, 8);
        let mut c = Setup::stiff(ball(2, 4)).coeffs;
        c.delta = SurfaceField::constant(2, delta);
        let gen = assemble_generator(&space, &c).unwrap();
        let x = random_potential(&space, seed);
        let stepper = membrane_acoustics::dynamics::Midpoint::new(&gen, dt).unwrap();
        let mut y = x.clone();
        let rep = stepper.step(&mut y).unwrap();
        let (e0, e1) = (gen.energy(&x), gen.energy(&y));
        prop_assert!((e1 - e0 + rep.dissipation).abs() <= 1e-11 * e0);
        prop_assert!(rep.dissipation >= 0.0);
        prop_assert!(rep.residual <= 1e-12);
    }
}
