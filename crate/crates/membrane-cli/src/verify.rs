//! The property suite behind `verify`: every checkable identity, at the
//! configured truncation and coefficients, with seeded random data.

use anyhow::Result;
use membrane_acoustics::bulk::VectorField;
use membrane_acoustics::coefficients::Coefficients;
use membrane_acoustics::dynamics::{
    conserved_quantities, weak_residual, InitialState, LagrangianState, Model, ModelTag, PotentialState, States, TimeConfig,
};
use membrane_acoustics::equilibria::{
    constraint_l, ell, equilibrium_residual, membership, project_atomic, project_structural, project_structural_explicit,
    ConfigurationPair, LagrangianModel,
};
use membrane_acoustics::membrane::is_identically_zero;
use membrane_acoustics::sampling;
use membrane_acoustics::spectral::SurfaceField;
use membrane_acoustics::transfer::{
    constraint_residuals, eulerian_to_lagrangian, lagrangian_state_to_eulerian, lagrangian_to_eulerian, lagrangian_to_potential,
    potential_to_eulerian, potential_to_lagrangian, stationary_difference,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::commands::{weak_tolerance, Experiment};
use crate::report::Check;

const L0: ModelTag = ModelTag::Lagrangian(LagrangianModel::L0);
const FULL: ModelTag = ModelTag::Lagrangian(LagrangianModel::Full);

fn with_delta(c: &Coefficients<f64>, delta: f64) -> Coefficients<f64> {
    Coefficients { delta: SurfaceField::constant(c.delta.l_max(), delta), ..c.clone() }
}

fn random_potential(model: &Model<'_, f64>, rng: &mut ChaCha8Rng) -> PotentialState<f64> {
    let space = model.space();
    PotentialState {
        u: sampling::scalar(space, rng),
        v: sampling::surface(space, rng),
        u_t: sampling::scalar(space, rng),
        v_t: sampling::surface(space, rng),
        t: 0.0,
    }
}

fn random_lagrangian(model: &Model<'_, f64>, which: LagrangianModel, rng: &mut ChaCha8Rng) -> Result<LagrangianState<f64>> {
    let space = model.space();
    let p = crate::presets::random_configuration(model, which, rng)?;
    Ok(LagrangianState {
        r: p.s,
        v: p.z,
        r_t: VectorField::gradient(space, &sampling::scalar(space, rng)),
        v_t: sampling::surface(space, rng),
        t: 0.0,
    })
}

fn lagrangian_gap(a: &[LagrangianState<f64>], b: &[LagrangianState<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            let d = (&p.configuration() - &q.configuration()).max_abs();
            let v = (&p.r_t - &q.r_t).max_abs().max((&p.v_t - &q.v_t).max_abs());
            d.max(v) / (1.0 + q.max_abs())
        })
        .fold(0.0, f64::max)
}

pub fn run(exp: &Experiment) -> Result<Vec<Check>> {
    let space = exp.space();
    let coeffs = &exp.resolved.coeffs;
    let tol = exp.config.tolerances;
    let dt = exp.resolved.time.dt;
    let mut rng = ChaCha8Rng::seed_from_u64(exp.config.seed);
    let mut checks = Vec::new();
    let mut push = |c: Check| {
        log::info!("{}", c.line());
        checks.push(c);
    };

    // Energy identity and conservation.
    let damped = if is_identically_zero(&coeffs.delta) { with_delta(coeffs, 1.0) } else { coeffs.clone() };
    let model = Model::new(space, &damped)?;
    let x = random_potential(&model, &mut rng);
    let traj = model.simulate(ModelTag::Potential { constrained: false }, &InitialState::Potential(x.clone()), TimeConfig::new(200.0 * dt, dt, 50))?;
    let e = traj.energies();
    push(Check::le("energy-identity", "per-step energy balance / E(0), damped", traj.max_energy_defect / e[0], tol.energy));
    let rise = e.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
    push(Check::le("energy-monotone", "energy never increases, damped", rise / e[0], 1e-12));
    let free = with_delta(coeffs, 0.0);
    let model = Model::new(space, &free)?;
    let traj = model.simulate(ModelTag::Potential { constrained: false }, &InitialState::Potential(x), TimeConfig::new(200.0 * dt, dt, 200))?;
    let e = traj.energies();
    push(Check::le("energy-conservation", "|E(T) - E(0)| / E(0), undamped", (e[e.len() - 1] - e[0]).abs() / e[0], 1e-10));

    let model = exp.model()?;
    let eq = model.special();
    let bulk = coeffs.bulk;
    let op = model.generator().membrane();

    // Conserved quantities of a generic run.
    let x = random_lagrangian(&model, LagrangianModel::Full, &mut rng)?;
    let size = 1.0 + x.max_abs();
    let traj = model.simulate(FULL, &InitialState::Lagrangian(x), TimeConfig::new(200.0 * dt, dt, 50))?;
    push(Check::le("conserved-quantities", "toroidal part, traces and L are constant", conserved_quantities(space, &traj)?.max() / size, tol.conservation));

    // Special equilibrium.
    push(Check::le("special-ell", "ell(s•, z•) = 1", (ell(space, &eq.pair(), eq)? - 1.0).abs(), 1e-12));
    let one = ConfigurationPair { s: VectorField::zeros(space), z: SurfaceField::one(space.l_max()) };
    let area = space.geometry().area_gamma1();
    push(Check::le("l-of-one", "L(0, 1) = |Γ1|", (constraint_l(space, &one)? - area).abs() / area, 1e-10));

    // Projector algebra on random pairs.
    let (mut idem, mut comp, mut range_e, mut explicit, mut atomic_sum, mut scaling) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut range_l0 = true;
    for _ in 0..exp.config.suite.pairs {
        let p = sampling::pair(space, &mut rng);
        let s = 1.0 + p.max_abs();
        let (onto_e, onto_l0) = project_structural(space, &p, eq)?;
        let (ee, el) = project_structural(space, &onto_e, eq)?;
        let (le, ll) = project_structural(space, &onto_l0, eq)?;
        idem = idem.max((&ee - &onto_e).max_abs().max((&ll - &onto_l0).max_abs()) / s);
        comp = comp.max(el.max_abs().max(le.max_abs()) / s);
        range_e = range_e.max(equilibrium_residual(space, &onto_e, bulk, op)?.1 / s);
        range_l0 &= membership(space, &onto_l0, tol.residual)?.contains(LagrangianModel::L0);
        let (xe, xl) = project_structural_explicit(space, &p, eq)?;
        explicit = explicit.max((&xe - &onto_e).max_abs().max((&xl - &onto_l0).max_abs()) / s);
        atomic_sum = atomic_sum.max((&project_atomic(space, &p, eq)?.sum() - &p).max_abs() / s);
        let x = LagrangianState { r: p.s.clone(), v: p.z.clone(), ..LagrangianState::zeros(space) };
        let l = constraint_l(space, &p)?;
        scaling = scaling.max((model.eulerian_constraint(&lagrangian_state_to_eulerian(&model, &x)?) + bulk * l).abs() / (1.0 + l.abs()));
    }
    push(Check::le("projector-idempotence", "P∘P = P for both projectors", idem, tol.projector));
    push(Check::le("projector-complementarity", "onto_E∘onto_L0 = onto_L0∘onto_E = 0", comp, tol.projector));
    push(Check::le("projector-range-e", "onto_E solves the equilibrium system", range_e, tol.residual));
    push(Check::holds("projector-range-l0", "onto_L0 lies in the L0 space", range_l0));
    push(Check::le("projector-explicit-path", "two-branch problems agree", explicit, tol.projector));
    push(Check::le("atomic-sum", "four-way split sums to identity", atomic_sum, tol.projector));
    push(Check::le("transfer-scaling", "L_Eul of the Eulerian image = -B L", scaling, 1e-9));

    // Transfers on a dense L0 run.
    let x = random_lagrangian(&model, LagrangianModel::L0, &mut rng)?;
    let lag = model.simulate(L0, &InitialState::Lagrangian(x), TimeConfig::new(1000.0 * dt, dt, 1))?;
    let xs = lag.states.lagrangian().expect("Lagrangian");
    let eul = lagrangian_to_eulerian(&model, &lag)?;
    let back = eulerian_to_lagrangian(&model, &eul)?;
    push(Check::le("transfer-eulerian-round-trip", "Eulerian inverse recovers the L0 run", lagrangian_gap(back.states.lagrangian().expect("L"), xs), tol.transfer));
    let escale = eul.diagnostics.iter().map(|d| d.energy.sqrt()).fold(1.0, f64::max);
    let worst = constraint_residuals(&model, &eul)?.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    push(Check::le("transfer-eulerian-constraint", "image of an L0 run satisfies ∫p = B∫v", worst / escale, 1e-9));
    let pot = lagrangian_to_potential(&model, &lag)?;
    let worst = constraint_residuals(&model, &pot)?.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    push(Check::le("transfer-potential-constraint", "image of an L0 run satisfies ρ0∫u_t = B∫v", worst / escale, 1e-9));
    let back = potential_to_lagrangian(&model, &pot)?;
    push(Check::le("transfer-potential-round-trip", "potential inverse recovers the L0 run", lagrangian_gap(back.states.lagrangian().expect("L"), xs), tol.transfer));
    let rep = stationary_difference(&model, &potential_to_eulerian(&model, &pot)?, &eul)?;
    push(Check::le(
        "transfer-commuting-diagram",
        "Eulerian images agree mod stationary",
        rep.time_variation.max(rep.stationary_residual) / rep.scale.max(1.0),
        tol.transfer,
    ));

    // Weak residuals, clean and corrupted.
    let clean = weak_residual(&model, &lag, exp.config.suite.weak_tests, exp.config.seed)?.max_relative();
    push(Check::le("weak-residual", "relative weak-form residual of an engine run", clean, weak_tolerance(&lag, tol.residual)));
    let mut bad = lag.clone();
    if let States::Lagrangian(xs) = &mut bad.states {
        for x in xs {
            x.v = x.v.scale(1.01);
        }
    }
    let corrupt = weak_residual(&model, &bad, exp.config.suite.weak_tests, exp.config.seed)?.max_relative();
    push(Check::le("weak-residual-corruption", "clean / corrupted residual", clean.max(1e-8) / corrupt, 1e-2));

    // Structural decomposition of solutions.
    let x = LagrangianState {
        r: VectorField::position(space, 1.0 / 3.0),
        r_t: VectorField::gradient(space, &sampling::scalar(space, &mut rng)),
        v_t: sampling::surface(space, &mut rng),
        ..LagrangianState::zeros(space)
    };
    let time = TimeConfig::new(100.0 * dt, dt, 10);
    let full = model.simulate(FULL, &InitialState::Lagrangian(x.clone()), time)?;
    let (onto_e, onto_l0) = project_structural(space, &x.configuration(), eq)?;
    let core = model.simulate(L0, &InitialState::Lagrangian(LagrangianState { r: onto_l0.s, v: onto_l0.z, ..x }), time)?;
    let shifted: Vec<_> = core
        .states
        .lagrangian()
        .expect("L")
        .iter()
        .map(|q| LagrangianState { r: &q.r + &onto_e.s, v: &q.v + &onto_e.z, ..q.clone() })
        .collect();
    push(Check::le("structural-solution-split", "L run = onto_E + L0 run", lagrangian_gap(full.states.lagrangian().expect("L"), &shifted), tol.transfer));

    Ok(checks)
}
