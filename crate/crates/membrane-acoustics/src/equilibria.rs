//! Constraint functionals, the special equilibrium, membership in the model
//! hierarchy, equilibrium residuals and the structural projectors.

use std::collections::BTreeSet;
use std::fmt;

use crate::bulk::{
    compatibility, divergence, norm_h1, solve_div_curl, ScalarBulkField, ToroidalField, VectorField, DEFAULT_TOL_COMPAT,
};
use crate::error::{Error, Result};
use crate::membrane::{solve_surface_equilibrium, MembraneOperator};
use crate::real::Real;
use crate::spectral::{DiscreteSpace, SurfaceField};

/// Default membership tolerance, relative to the H¹ norm of the pair.
pub const DEFAULT_TOL_MEMBERSHIP: f64 = 1e-9;

/// An element (s, z) of the Lagrangian configuration space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationPair<T: Real> {
    pub s: VectorField<T>,
    pub z: SurfaceField<T>,
}

impl<T: Real> ConfigurationPair<T> {
    pub fn new(space: &DiscreteSpace<T>, s: VectorField<T>, z: SurfaceField<T>) -> Result<Self> {
        space.expect_shape(s.l_max(), s.n_r(), "vector field")?;
        space.expect_l_max(z.l_max(), "surface field")?;
        Ok(Self { s, z })
    }

    pub fn zeros(space: &DiscreteSpace<T>) -> Self {
        Self { s: VectorField::zeros(space), z: SurfaceField::zeros(space.l_max()) }
    }

    pub fn scale(&self, c: T) -> Self {
        Self { s: self.s.scale(c), z: self.z.scale(c) }
    }

    pub fn axpy(&mut self, c: T, other: &Self) {
        self.s.axpy(c, &other.s);
        self.z.axpy(c, &other.z);
    }

    /// Largest stored coefficient in absolute value.
    pub fn max_abs(&self) -> T {
        self.s.max_abs().max(self.z.max_abs())
    }

    /// (‖s‖²_{H¹(Ω)} + ‖z‖²_{H¹(Γ1)})^{1/2}.
    pub fn norm_h1(&self, space: &DiscreteSpace<T>) -> Result<T> {
        let ns = norm_h1(space, &self.s)?;
        let nz = self.z.norm_h1(space.outer_radius());
        Ok((ns * ns + nz * nz).sqrt())
    }
}

impl_linear_ops!(ConfigurationPair);

/// L(s, z) = ∫_Γ s·ν + ∫_{Γ1} z, evaluated as ∫_Ω div s + ∫_{Γ1} z.
pub fn constraint_l<T: Real>(space: &DiscreteSpace<T>, p: &ConfigurationPair<T>) -> Result<T> {
    let d = divergence(space, &p.s)?;
    Ok(d.integrate(space) + p.z.integrate(space.outer_radius()))
}

/// L(s, z) from the boundary integrals directly.
pub fn constraint_l_surface<T: Real>(space: &DiscreteSpace<T>, p: &ConfigurationPair<T>) -> T {
    let (a, b) = (space.inner_radius(), space.outer_radius());
    p.s.trace_inner().integrate(a) + p.s.trace_outer().integrate(b) + p.z.integrate(b)
}

/// The distinguished equilibrium (s•, z•) with L(s•, z•) ≠ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialEquilibrium<T: Real> {
    pub s_bullet: VectorField<T>,
    pub z_bullet: SurfaceField<T>,
    pub l_value: T,
    pub kappa_zero: bool,
}

impl<T: Real> SpecialEquilibrium<T> {
    pub fn pair(&self) -> ConfigurationPair<T> {
        ConfigurationPair { s: self.s_bullet.clone(), z: self.z_bullet.clone() }
    }
}

/// (0, 𝟙) when κ ≡ 0; otherwise (s*, z*) with
/// −Div_Γ(σ∇_Γz*) + κz* + B = 0 and div s* = −1, s*·ν = 0 on Γ0,
/// s*·ν = −|Ω|/|Γ1| on Γ1.
pub fn special_equilibrium<T: Real>(
    space: &DiscreteSpace<T>,
    op: &MembraneOperator<T>,
    bulk: T,
) -> Result<SpecialEquilibrium<T>> {
    let l_max = space.l_max();
    let (s_bullet, z_bullet) = if op.kappa_zero() {
        (VectorField::zeros(space), SurfaceField::one(l_max))
    } else {
        let z = solve_surface_equilibrium(op, bulk)?;
        let geo = space.geometry();
        let s = solve_div_curl(
            space,
            &ScalarBulkField::constant(space, -T::one()),
            &SurfaceField::zeros(l_max),
            &SurfaceField::constant(l_max, geo.volume() / geo.area_gamma1()),
            &ToroidalField::zeros(space),
            DEFAULT_TOL_COMPAT,
        )?;
        (s, z)
    };
    let mut eq = SpecialEquilibrium { s_bullet, z_bullet, l_value: T::zero(), kappa_zero: op.kappa_zero() };
    eq.l_value = constraint_l(space, &eq.pair())?;
    Ok(eq)
}

/// ℓ(s, z) = L(s, z) / L(s•, z•).
pub fn ell<T: Real>(space: &DiscreteSpace<T>, p: &ConfigurationPair<T>, eq: &SpecialEquilibrium<T>) -> Result<T> {
    Ok(constraint_l(space, p)? / eq.l_value)
}

/// ℓ from the two-branch closed form: denominator |Γ1| when κ ≡ 0,
/// −|Ω| + ∫z* otherwise.
pub fn ell_closed_form<T: Real>(space: &DiscreteSpace<T>, p: &ConfigurationPair<T>, eq: &SpecialEquilibrium<T>) -> T {
    let geo = space.geometry();
    let den = if eq.kappa_zero {
        geo.area_gamma1()
    } else {
        -geo.volume() + eq.z_bullet.integrate(space.outer_radius())
    };
    constraint_l_surface(space, p) / den
}

/// The Lagrangian models ℒ⁰ ⊂ … ⊂ ℒ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LagrangianModel {
    L0,
    L1,
    L2,
    L3,
    L4,
    Full,
}

impl LagrangianModel {
    pub const ALL: [LagrangianModel; 6] = [Self::L0, Self::L1, Self::L2, Self::L3, Self::L4, Self::Full];

    pub fn name(self) -> &'static str {
        match self {
            Self::L0 => "L0",
            Self::L1 => "L1",
            Self::L2 => "L2",
            Self::L3 => "L3",
            Self::L4 => "L4",
            Self::Full => "L",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s))
    }

    /// Models that contain this one.
    pub fn supersets(self) -> BTreeSet<Self> {
        use LagrangianModel::*;
        let list: &[Self] = match self {
            L0 => &[L0, L1, L2, L3, L4, Full],
            L1 => &[L1, L3, Full],
            L2 => &[L2, L3, L4, Full],
            L3 => &[L3, Full],
            L4 => &[L4, Full],
            Full => &[Full],
        };
        list.iter().copied().collect()
    }
}

impl fmt::Display for LagrangianModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub curl_free: bool,
    pub trace_gamma0_zero: bool,
    pub trace_gamma1_matches_minus_z: bool,
    pub l_zero: bool,
    pub models: BTreeSet<LagrangianModel>,
}

impl MembershipReport {
    pub fn contains(&self, m: LagrangianModel) -> bool {
        self.models.contains(&m)
    }
}

/// Which configuration spaces contain p. `tol` is relative to ‖p‖_{H¹}.
pub fn membership<T: Real>(space: &DiscreteSpace<T>, p: &ConfigurationPair<T>, tol: f64) -> Result<MembershipReport> {
    let (a, b) = (space.inner_radius(), space.outer_radius());
    let threshold = tol * p.norm_h1(space)?.as_f64();
    let curl_free = p.s.toroidal().norm_l2(space).as_f64() <= threshold;
    let trace_gamma0_zero = p.s.trace_inner().norm_l2(a).as_f64() <= threshold;
    let trace_gamma1_matches_minus_z = (p.s.trace_outer() + &p.z).norm_l2(b).as_f64() <= threshold;
    let l_zero = constraint_l(space, p)?.as_f64().abs() <= threshold;
    let traces = trace_gamma0_zero && trace_gamma1_matches_minus_z;
    use LagrangianModel::*;
    let mut models = BTreeSet::from([Full]);
    for (m, holds) in [(L0, curl_free && traces), (L1, traces), (L2, curl_free && l_zero), (L3, l_zero), (L4, curl_free)] {
        if holds {
            models.insert(m);
        }
    }
    Ok(MembershipReport { curl_free, trace_gamma0_zero, trace_gamma1_matches_minus_z, l_zero, models })
}

/// Returns (p0, residual) for the equilibrium system −B div s = p0 in Ω,
/// −Div_Γ(σ∇_Γz) + κz + p0 = 0 on Γ1. p0 is the volume mean of −B div s;
/// the residual is the L² deviation from that constant plus the L²(Γ1)
/// norm of the weak membrane residual.
pub fn equilibrium_residual<T: Real>(
    space: &DiscreteSpace<T>,
    p: &ConfigurationPair<T>,
    bulk: T,
    op: &MembraneOperator<T>,
) -> Result<(T, T)> {
    let pressure = divergence(space, &p.s)?.scale(-bulk);
    let p0 = pressure.mean(space);
    let bulk_res = (&pressure - &ScalarBulkField::constant(space, p0)).norm_l2(space);
    let b = space.outer_radius();
    let mut weak = op.weak_apply(&p.z);
    weak[0] += p0 * b * b * (T::lit(4.0) * T::pi()).sqrt();
    Ok((p0, bulk_res + weak.norm() / b))
}

/// Scale of the data entering L(p), used as the reference for round-off in
/// the projector problems, whose own data can cancel to nearly zero.
fn data_scale<T: Real>(space: &DiscreteSpace<T>, p: &ConfigurationPair<T>) -> Result<T> {
    let d = divergence(space, &p.s)?;
    let (_, scale) = compatibility(space, &d, p.s.trace_inner(), &(p.s.trace_outer() + &p.z));
    let (_, zs) = compatibility(space, &ScalarBulkField::zeros(space), &SurfaceField::zeros(space.l_max()), &p.z);
    Ok(scale + zs)
}

/// solve_div_curl for data that are compatible up to round-off relative to
/// `reference`; the residual is absorbed into the volume mean.
pub(crate) fn solve_projector_problem<T: Real>(
    space: &DiscreteSpace<T>,
    w: &ScalarBulkField<T>,
    z0: &SurfaceField<T>,
    z1: &SurfaceField<T>,
    curl: &ToroidalField<T>,
    reference: T,
) -> Result<VectorField<T>> {
    let (residual, scale) = compatibility(space, w, z0, z1);
    let tolerance = DEFAULT_TOL_COMPAT * (scale + reference).as_f64().max(f64::MIN_POSITIVE);
    if residual.as_f64().abs() > tolerance {
        return Err(Error::Compatibility { residual: residual.as_f64().abs(), tolerance });
    }
    let w = w - &ScalarBulkField::constant(space, residual / space.geometry().volume());
    solve_div_curl(space, &w, z0, z1, curl, f64::INFINITY)
}

/// Π onto the equilibria and onto H¹_{ℒ⁰}, via the div–curl problems
/// f: div f = ℓ div s•, curl f = curl s, f·ν = s·ν on Γ0,
///    f·ν = s·ν + z − ℓz• on Γ1;
/// g: div g = div s − ℓ div s•, curl g = 0, g·ν = 0 on Γ0,
///    g·ν = −z + ℓz• on Γ1.
pub fn project_structural<T: Real>(
    space: &DiscreteSpace<T>,
    p: &ConfigurationPair<T>,
    eq: &SpecialEquilibrium<T>,
) -> Result<(ConfigurationPair<T>, ConfigurationPair<T>)> {
    let lambda = ell(space, p, eq)?;
    let reference = data_scale(space, p)? + lambda.mag() * data_scale(space, &eq.pair())?;
    let div_s = divergence(space, &p.s)?;
    let div_sb = divergence(space, &eq.s_bullet)?;
    let z_rest = &p.z - &eq.z_bullet.scale(lambda);
    let f = solve_projector_problem(
        space,
        &div_sb.scale(lambda),
        &p.s.trace_inner().scale(-T::one()),
        &(p.s.trace_outer() + &z_rest).scale(-T::one()),
        p.s.toroidal(),
        reference,
    )?;
    let g = solve_projector_problem(
        space,
        &(&div_s - &div_sb.scale(lambda)),
        &SurfaceField::zeros(space.l_max()),
        &z_rest,
        &ToroidalField::zeros(space),
        reference,
    )?;
    Ok((ConfigurationPair { s: f, z: eq.z_bullet.scale(lambda) }, ConfigurationPair { s: g, z: z_rest }))
}

/// The same projectors through the explicit two-branch problems: for κ ≡ 0
/// the data use L/|Γ1| and no s•; for κ ≢ 0 they use L/(|Ω| − ∫z*) and
/// div s* = −1 directly.
pub fn project_structural_explicit<T: Real>(
    space: &DiscreteSpace<T>,
    p: &ConfigurationPair<T>,
    eq: &SpecialEquilibrium<T>,
) -> Result<(ConfigurationPair<T>, ConfigurationPair<T>)> {
    let geo = space.geometry();
    let b = space.outer_radius();
    let l_max = space.l_max();
    let big_l = constraint_l_surface(space, p);
    let reference = data_scale(space, p)? + (big_l / eq.l_value).mag() * data_scale(space, &eq.pair())?;
    let div_s = divergence(space, &p.s)?;
    let minus = |f: &SurfaceField<T>| f.scale(-T::one());
    if eq.kappa_zero {
        let c = big_l / geo.area_gamma1();
        let m = solve_projector_problem(
            space,
            &ScalarBulkField::zeros(space),
            &minus(p.s.trace_inner()),
            &minus(&(p.s.trace_outer() + &p.z - SurfaceField::constant(l_max, c))),
            p.s.toroidal(),
            reference,
        )?;
        let n = solve_projector_problem(
            space,
            &div_s,
            &SurfaceField::zeros(l_max),
            &(&p.z - &SurfaceField::constant(l_max, c)),
            &ToroidalField::zeros(space),
            reference,
        )?;
        let zc = SurfaceField::constant(l_max, c);
        Ok((ConfigurationPair { s: m, z: zc.clone() }, ConfigurationPair { s: n, z: &p.z - &zc }))
    } else {
        let zstar = &eq.z_bullet;
        let c = big_l / (geo.volume() - zstar.integrate(b));
        let pv = solve_projector_problem(
            space,
            &ScalarBulkField::constant(space, c),
            &minus(p.s.trace_inner()),
            &minus(&(p.s.trace_outer() + &p.z + zstar.scale(c))),
            p.s.toroidal(),
            reference,
        )?;
        let qv = solve_projector_problem(
            space,
            &(&div_s - &ScalarBulkField::constant(space, c)),
            &SurfaceField::zeros(l_max),
            &(&p.z + &zstar.scale(c)),
            &ToroidalField::zeros(space),
            reference,
        )?;
        Ok((
            ConfigurationPair { s: pv, z: zstar.scale(-c) },
            ConfigurationPair { s: qv, z: &p.z + &zstar.scale(c) },
        ))
    }
}

/// Four-way split p = on_l0 + on_e1 + on_e2 + on_ebullet.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicDecomposition<T: Real> {
    pub on_l0: ConfigurationPair<T>,
    pub on_e1: ConfigurationPair<T>,
    pub on_e2: ConfigurationPair<T>,
    pub on_ebullet: ConfigurationPair<T>,
}

impl<T: Real> AtomicDecomposition<T> {
    pub fn sum(&self) -> ConfigurationPair<T> {
        &(&self.on_l0 + &self.on_e1) + &(&self.on_e2 + &self.on_ebullet)
    }
}

/// on_ebullet = ℓ(s•, z•); on_e1 = (toroidal part, 0); on_e2 = (k, 0) with
/// div k = 0, curl k = 0, k·ν = s·ν on Γ0,
/// k·ν = s·ν + z − ℓ(s•·ν + z•) on Γ1; on_l0 from the g-problem.
pub fn project_atomic<T: Real>(
    space: &DiscreteSpace<T>,
    p: &ConfigurationPair<T>,
    eq: &SpecialEquilibrium<T>,
) -> Result<AtomicDecomposition<T>> {
    let lambda = ell(space, p, eq)?;
    let reference = data_scale(space, p)? + lambda.mag() * data_scale(space, &eq.pair())?;
    let l_max = space.l_max();
    let on_ebullet = eq.pair().scale(lambda);
    let on_e1 = ConfigurationPair {
        s: VectorField::toroidal_only(space, p.s.toroidal().clone()),
        z: SurfaceField::zeros(l_max),
    };
    let gamma1 = &(p.s.trace_outer() + &p.z) - &(eq.s_bullet.trace_outer() + &eq.z_bullet).scale(lambda);
    let k = solve_projector_problem(
        space,
        &ScalarBulkField::zeros(space),
        &p.s.trace_inner().scale(-T::one()),
        &gamma1.scale(-T::one()),
        &ToroidalField::zeros(space),
        reference,
    )?;
    let on_e2 = ConfigurationPair { s: k, z: SurfaceField::zeros(l_max) };
    let (_, on_l0) = project_structural(space, p, eq)?;
    Ok(AtomicDecomposition { on_l0, on_e1, on_e2, on_ebullet })
}
