//! Evolution of the potential model and the trajectories derived from it.

mod dispersion;
mod engine;
mod oracle;
mod simulate;
mod state;
mod weak;

pub use dispersion::{
    dispersion_roots, generator_eigenvalues, spherical_bessel, spherical_bessel_with_derivative, ModeParameters,
};
pub use engine::{assemble_generator, step_midpoint, Generator, Midpoint, StepReport};
pub use oracle::{reference_oracle, ReferenceOracle, DEFAULT_DT_REF, ORACLE_MAX_L, ORACLE_MAX_NR};
pub use simulate::{
    conserved_quantities, dissipation_integral, energy, simulate, Diagnostics, DriftReport, Model, States, TimeConfig,
    Trajectory, DEFAULT_TOL_CONSTRAINT,
};
pub use state::{velocity_field, EulerianState, InitialState, LagrangianState, ModelTag, PotentialState};
pub use weak::{weak_residual, WeakReport};
