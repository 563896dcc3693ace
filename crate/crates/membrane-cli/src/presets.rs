//! Named initial data.

use anyhow::{bail, Result};
use membrane_acoustics::bulk::{ScalarBulkField, VectorField};
use membrane_acoustics::dynamics::{InitialState, LagrangianState, Model, ModelTag, PotentialState};
use membrane_acoustics::equilibria::{ell, ConfigurationPair, LagrangianModel};
use membrane_acoustics::sampling;
use membrane_acoustics::transfer::{decompose_eulerian, eulerian_special, lagrangian_state_to_eulerian};
use membrane_acoustics::Space;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const NAMES: [&str; 5] = ["pure-equilibrium", "rest", "structural-third", "stability", "random"];

/// A random configuration in the space of the given Lagrangian model.
pub fn random_configuration(model: &Model<'_, f64>, which: LagrangianModel, rng: &mut ChaCha8Rng) -> Result<ConfigurationPair<f64>> {
    use LagrangianModel::*;
    let space = model.space();
    let eq = model.special();
    let mut p = match which {
        L0 => sampling::l0_pair(space, rng),
        L1 => {
            let mut p = sampling::l0_pair(space, rng);
            p.s += &VectorField::toroidal_only(space, sampling::toroidal(space, rng));
            p
        }
        Full | L3 => sampling::pair(space, rng),
        L2 | L4 => {
            let mut p = sampling::pair(space, rng);
            p.s = p.s.curl_free_part();
            p
        }
    };
    if matches!(which, L2 | L3) {
        let lambda = ell(space, &p, eq)?;
        p.axpy(-lambda, &eq.pair());
    }
    Ok(p)
}

fn random_lagrangian(model: &Model<'_, f64>, which: LagrangianModel, rng: &mut ChaCha8Rng) -> Result<LagrangianState<f64>> {
    let space = model.space();
    let p = random_configuration(model, which, rng)?;
    Ok(LagrangianState {
        r: p.s,
        v: p.z,
        r_t: VectorField::gradient(space, &sampling::scalar(space, rng)),
        v_t: sampling::surface(space, rng),
        t: 0.0,
    })
}

/// (x/3, 0) with the given velocities.
fn third(space: &Space, r_t: VectorField<f64>) -> LagrangianState<f64> {
    LagrangianState { r: VectorField::position(space, 1.0 / 3.0), r_t, ..LagrangianState::zeros(space) }
}

fn scale(x: InitialState<f64>, a: f64) -> InitialState<f64> {
    match x {
        InitialState::Lagrangian(x) => InitialState::Lagrangian(LagrangianState {
            r: x.r.scale(a),
            v: x.v.scale(a),
            r_t: x.r_t.scale(a),
            v_t: x.v_t.scale(a),
            t: x.t,
        }),
        InitialState::Eulerian(mut x) => {
            x.p = x.p.scale(a);
            x.vvec = x.vvec.scale(a);
            x.v = x.v.scale(a);
            x.v_t = x.v_t.scale(a);
            InitialState::Eulerian(x)
        }
        InitialState::Potential(x) => InitialState::Potential(PotentialState {
            u: x.u.scale(a),
            v: x.v.scale(a),
            u_t: x.u_t.scale(a),
            v_t: x.v_t.scale(a),
            t: x.t,
        }),
    }
}

/// Builds the named preset in the state kind the tag expects.
pub fn build(model: &Model<'_, f64>, tag: ModelTag, name: &str, amplitude: f64, seed: u64) -> Result<InitialState<f64>> {
    let space = model.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = match (name, tag) {
        ("rest", ModelTag::Lagrangian(_)) => InitialState::Lagrangian(LagrangianState::zeros(space)),
        ("rest", ModelTag::Eulerian { .. }) => InitialState::Eulerian(membrane_acoustics::dynamics::EulerianState::zeros(space)),
        ("rest", ModelTag::Potential { .. }) => InitialState::Potential(PotentialState::zeros(space)),
        ("pure-equilibrium", ModelTag::Lagrangian(_)) => {
            InitialState::Lagrangian(LagrangianState::at_rest(space, &model.special().pair()))
        }
        ("pure-equilibrium", ModelTag::Eulerian { .. }) => InitialState::Eulerian(eulerian_special(model)?),
        ("pure-equilibrium", ModelTag::Potential { .. }) => InitialState::Potential(PotentialState {
            u: ScalarBulkField::constant(space, 1.0),
            ..PotentialState::zeros(space)
        }),
        ("structural-third", ModelTag::Lagrangian(_)) => {
            let mut x = third(space, VectorField::gradient(space, &sampling::scalar(space, &mut rng)));
            x.v_t = sampling::surface(space, &mut rng);
            InitialState::Lagrangian(x)
        }
        ("stability", ModelTag::Lagrangian(_)) => {
            let g = if space.l_max() >= 2 {
                ScalarBulkField::from_radial(space, 2, 0, |r| r * r)
            } else {
                ScalarBulkField::from_radial(space, 0, 0, |r| r * r)
            };
            InitialState::Lagrangian(third(space, VectorField::gradient(space, &g)))
        }
        ("random", ModelTag::Lagrangian(which)) => InitialState::Lagrangian(random_lagrangian(model, which, &mut rng)?),
        ("random", ModelTag::Eulerian { constrained }) => {
            let x = lagrangian_state_to_eulerian(model, &random_lagrangian(model, LagrangianModel::Full, &mut rng)?)?;
            InitialState::Eulerian(if constrained { decompose_eulerian(model, &x)?.0 } else { x })
        }
        ("random", ModelTag::Potential { constrained }) => {
            let mut x = PotentialState {
                u: sampling::scalar(space, &mut rng),
                v: sampling::surface(space, &mut rng),
                u_t: sampling::scalar(space, &mut rng),
                v_t: sampling::surface(space, &mut rng),
                t: 0.0,
            };
            if constrained {
                let c = model.coeffs();
                let shift = model.potential_constraint(&x) / (c.rho0 * space.geometry().volume());
                x.u_t -= &ScalarBulkField::constant(space, shift);
            }
            InitialState::Potential(x)
        }
        (name, tag) if NAMES.contains(&name) => bail!("preset {name:?} is only defined for Lagrangian models, not {tag}"),
        (name, _) => bail!("unknown preset {name:?}"),
    };
    Ok(if amplitude == 1.0 { x } else { scale(x, amplitude) })
}
