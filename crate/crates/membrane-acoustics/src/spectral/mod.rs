//! Geometry, harmonics, radial grids and quadrature.

mod gauss;
mod geometry;
mod harmonics;
mod radial;
mod space;
mod sphere;
mod surface_field;

pub use gauss::{gauss_legendre, legendre_with_derivative};
pub use geometry::{Boundary, Geometry, GeometryKind};
pub use harmonics::{degree_order, harmonic_values, HarmonicValues, LegendreTable, ShIndex};
pub use radial::RadialGrid;
pub(crate) use space::RadialFactor;
pub use space::{DiscreteSpace, MAX_L, MIN_NR};
pub use sphere::SphereGrid;
pub use surface_field::SurfaceField;

use crate::bulk::ScalarBulkField;
use crate::error::Result;
use crate::real::Real;

/// ∫_{Γ1} f dA.
pub fn integrate_surface<T: Real>(space: &DiscreteSpace<T>, f: &SurfaceField<T>) -> Result<T> {
    space.expect_l_max(f.l_max(), "integrate_surface")?;
    Ok(f.integrate(space.outer_radius()))
}

/// ∫_Ω f dV, from the (0,0) radial profile.
pub fn integrate_volume<T: Real>(space: &DiscreteSpace<T>, f: &ScalarBulkField<T>) -> Result<T> {
    space.expect_shape(f.l_max(), f.n_r(), "integrate_volume")?;
    Ok(f.integrate(space))
}
