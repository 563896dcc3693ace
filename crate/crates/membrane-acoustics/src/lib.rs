//! Acoustic waves in a ball or spherical shell whose outer boundary is a
//! non-locally reacting membrane.
//!
//! The crate evolves the velocity-potential model with an energy-conserving
//! spectral discretization, reconstructs the Lagrangian and Eulerian
//! descriptions from it, and computes the equilibrium spaces, constraint
//! functionals and structural projectors that relate the model family.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`, which the tolerances in the test
//! suite assume.

#[macro_use]
mod macros;

mod error;
mod real;

pub mod bulk;
pub mod coefficients;
pub mod dynamics;
pub mod equilibria;
pub mod membrane;
pub mod sampling;
pub mod spectral;
pub mod transfer;

pub use error::{Error, Result};
pub use real::Real;

/// `f64` instantiations.
pub type Space = spectral::DiscreteSpace<f64>;
pub type Surface = spectral::SurfaceField<f64>;
pub type Scalar = bulk::ScalarBulkField<f64>;
pub type Vector = bulk::VectorField<f64>;
pub type Toroidal = bulk::ToroidalField<f64>;
pub type Pair = equilibria::ConfigurationPair<f64>;
