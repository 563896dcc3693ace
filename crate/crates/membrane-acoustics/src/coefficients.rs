//! Physical constants and boundary coefficient fields.

use crate::error::{Error, Result};
use crate::membrane::{assemble_membrane, node_minimum, MembraneOperator};
use crate::real::Real;
use crate::spectral::{DiscreteSpace, SurfaceField};

/// ρ0, B and the membrane coefficients μ, σ, δ, κ on Γ1.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients<T: Real> {
    pub rho0: T,
    pub bulk: T,
    pub mu: SurfaceField<T>,
    pub sigma: SurfaceField<T>,
    pub delta: SurfaceField<T>,
    pub kappa: SurfaceField<T>,
}

impl<T: Real> Coefficients<T> {
    /// Spatially constant coefficients.
    pub fn constant(l_max: usize, rho0: T, bulk: T, mu: T, sigma: T, delta: T, kappa: T) -> Self {
        Self {
            rho0,
            bulk,
            mu: SurfaceField::constant(l_max, mu),
            sigma: SurfaceField::constant(l_max, sigma),
            delta: SurfaceField::constant(l_max, delta),
            kappa: SurfaceField::constant(l_max, kappa),
        }
    }

    /// All coefficients equal to one, with the given δ and κ.
    pub fn unit(l_max: usize, delta: T, kappa: T) -> Self {
        Self::constant(l_max, T::one(), T::one(), T::one(), T::one(), delta, kappa)
    }

    /// Checks the standing assumptions at the surface quadrature nodes.
    pub fn validate(&self, space: &DiscreteSpace<T>) -> Result<()> {
        for (name, f) in [("μ", &self.mu), ("σ", &self.sigma), ("δ", &self.delta), ("κ", &self.kappa)] {
            space.expect_l_max(f.l_max(), name)?;
            if f.coeffs().iter().any(|c| !c.as_f64().is_finite()) {
                return Err(Error::Coefficient(format!("{name} has non-finite coefficients")));
            }
        }
        if !(self.rho0 > T::zero()) || !self.rho0.as_f64().is_finite() {
            return Err(Error::Coefficient(format!("ρ0 > 0 required, got {:.3e}", self.rho0)));
        }
        if !(self.bulk > T::zero()) || !self.bulk.as_f64().is_finite() {
            return Err(Error::Coefficient(format!("B > 0 required, got {:.3e}", self.bulk)));
        }
        let mu_min = node_minimum(space, &self.mu);
        if !(mu_min > T::zero()) {
            return Err(Error::Coefficient(format!("min μ > 0 required, found {mu_min:.3e} at a quadrature node")));
        }
        let delta_min = node_minimum(space, &self.delta);
        if delta_min < -T::lit(64.0 * T::EPS) * self.delta.max_abs() {
            return Err(Error::Coefficient(format!("δ ≥ 0 required, found {delta_min:.3e} at a quadrature node")));
        }
        // σ and κ bounds are enforced by the membrane assembly.
        self.membrane(space).map(|_| ())
    }

    pub fn membrane(&self, space: &DiscreteSpace<T>) -> Result<MembraneOperator<T>> {
        assemble_membrane(space, &self.sigma, &self.kappa)
    }

    /// Whether every coefficient field is constant on Γ1.
    pub fn is_constant(&self) -> bool {
        [&self.mu, &self.sigma, &self.delta, &self.kappa]
            .iter()
            .all(|f| f.coeffs().iter().skip(1).all(|c| c.mag() <= T::lit(16.0 * T::EPS) * f.max_abs()))
    }

    /// Sound speed √(B/ρ0).
    pub fn wave_speed(&self) -> T {
        (self.bulk / self.rho0).sqrt()
    }

    pub fn cast<U: Real>(&self) -> Coefficients<U> {
        Coefficients {
            rho0: U::lit(self.rho0.as_f64()),
            bulk: U::lit(self.bulk.as_f64()),
            mu: self.mu.cast(),
            sigma: self.sigma.cast(),
            delta: self.delta.cast(),
            kappa: self.kappa.cast(),
        }
    }
}
