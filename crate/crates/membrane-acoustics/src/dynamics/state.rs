use std::fmt;

use crate::bulk::{ScalarBulkField, VectorField};
use crate::equilibria::{ConfigurationPair, LagrangianModel};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::{DiscreteSpace, SurfaceField};

/// Which system a trajectory belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelTag {
    Lagrangian(LagrangianModel),
    Eulerian { constrained: bool },
    Potential { constrained: bool },
}

impl ModelTag {
    pub fn name(self) -> String {
        match self {
            Self::Lagrangian(m) => m.name().to_string(),
            Self::Eulerian { constrained: false } => "E".into(),
            Self::Eulerian { constrained: true } => "Ec".into(),
            Self::Potential { constrained: false } => "P".into(),
            Self::Potential { constrained: true } => "Pc".into(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "E" => Some(Self::Eulerian { constrained: false }),
            "Ec" => Some(Self::Eulerian { constrained: true }),
            "P" => Some(Self::Potential { constrained: false }),
            "Pc" => Some(Self::Potential { constrained: true }),
            _ => LagrangianModel::parse(s).map(Self::Lagrangian),
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// (u, v, u_t, v_t) at time t for the potential model.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialState<T: Real> {
    pub u: ScalarBulkField<T>,
    pub v: SurfaceField<T>,
    pub u_t: ScalarBulkField<T>,
    pub v_t: SurfaceField<T>,
    pub t: f64,
}

impl<T: Real> PotentialState<T> {
    pub fn zeros(space: &DiscreteSpace<T>) -> Self {
        Self {
            u: ScalarBulkField::zeros(space),
            v: SurfaceField::zeros(space.l_max()),
            u_t: ScalarBulkField::zeros(space),
            v_t: SurfaceField::zeros(space.l_max()),
            t: 0.0,
        }
    }

    pub fn max_abs(&self) -> T {
        self.u.max_abs().max(self.v.max_abs()).max(self.u_t.max_abs()).max(self.v_t.max_abs())
    }

    pub(crate) fn check(&self, space: &DiscreteSpace<T>) -> Result<()> {
        space.expect_shape(self.u.l_max(), self.u.n_r(), "u")?;
        space.expect_shape(self.u_t.l_max(), self.u_t.n_r(), "u_t")?;
        space.expect_l_max(self.v.l_max(), "v")?;
        space.expect_l_max(self.v_t.l_max(), "v_t")
    }
}

/// (r, v, r_t, v_t) at time t; r_t is curl-free.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianState<T: Real> {
    pub r: VectorField<T>,
    pub v: SurfaceField<T>,
    pub r_t: VectorField<T>,
    pub v_t: SurfaceField<T>,
    pub t: f64,
}

impl<T: Real> LagrangianState<T> {
    pub fn zeros(space: &DiscreteSpace<T>) -> Self {
        Self {
            r: VectorField::zeros(space),
            v: SurfaceField::zeros(space.l_max()),
            r_t: VectorField::zeros(space),
            v_t: SurfaceField::zeros(space.l_max()),
            t: 0.0,
        }
    }

    /// At rest in the configuration p.
    pub fn at_rest(space: &DiscreteSpace<T>, p: &ConfigurationPair<T>) -> Self {
        Self { r: p.s.clone(), v: p.z.clone(), ..Self::zeros(space) }
    }

    pub fn configuration(&self) -> ConfigurationPair<T> {
        ConfigurationPair { s: self.r.clone(), z: self.v.clone() }
    }

    pub fn max_abs(&self) -> T {
        self.r.max_abs().max(self.v.max_abs()).max(self.r_t.max_abs()).max(self.v_t.max_abs())
    }

    pub(crate) fn check(&self, space: &DiscreteSpace<T>) -> Result<()> {
        space.expect_shape(self.r.l_max(), self.r.n_r(), "r")?;
        space.expect_shape(self.r_t.l_max(), self.r_t.n_r(), "r_t")?;
        space.expect_l_max(self.v.l_max(), "v")?;
        space.expect_l_max(self.v_t.l_max(), "v_t")?;
        if !self.r_t.is_curl_free() {
            return Err(Error::Membership("r_t must be curl-free".into()));
        }
        Ok(())
    }
}

/// (p, 𝐯, v, v_t) at time t; 𝐯 is curl-free.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerianState<T: Real> {
    pub p: ScalarBulkField<T>,
    pub vvec: VectorField<T>,
    pub v: SurfaceField<T>,
    pub v_t: SurfaceField<T>,
    pub t: f64,
}

impl<T: Real> EulerianState<T> {
    pub fn zeros(space: &DiscreteSpace<T>) -> Self {
        Self {
            p: ScalarBulkField::zeros(space),
            vvec: VectorField::zeros(space),
            v: SurfaceField::zeros(space.l_max()),
            v_t: SurfaceField::zeros(space.l_max()),
            t: 0.0,
        }
    }

    pub fn max_abs(&self) -> T {
        self.p.max_abs().max(self.vvec.max_abs()).max(self.v.max_abs()).max(self.v_t.max_abs())
    }

    pub(crate) fn check(&self, space: &DiscreteSpace<T>) -> Result<()> {
        space.expect_shape(self.p.l_max(), self.p.n_r(), "p")?;
        space.expect_shape(self.vvec.l_max(), self.vvec.n_r(), "velocity")?;
        space.expect_l_max(self.v.l_max(), "v")?;
        space.expect_l_max(self.v_t.l_max(), "v_t")?;
        if !self.vvec.is_curl_free() {
            return Err(Error::Membership("the Eulerian velocity must be curl-free".into()));
        }
        Ok(())
    }
}

/// Initial data for [`simulate`](super::simulate).
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState<T: Real> {
    Lagrangian(LagrangianState<T>),
    Eulerian(EulerianState<T>),
    Potential(PotentialState<T>),
}

/// The velocity field −∇u carrying the boundary flux −v_t on Γ1 and 0 on Γ0.
pub fn velocity_field<T: Real>(
    space: &DiscreteSpace<T>,
    u: &ScalarBulkField<T>,
    v_t: &SurfaceField<T>,
) -> Result<VectorField<T>> {
    VectorField::from_parts(
        space,
        u.scale(-T::one()),
        SurfaceField::zeros(space.l_max()),
        v_t.scale(-T::one()),
        crate::bulk::ToroidalField::zeros(space),
    )
}
