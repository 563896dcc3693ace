//! Fields on Ω, div/curl/normal trace, and the elliptic solvers.

mod ops;
mod scalar;
mod solve;
mod toroidal;
mod vector;

pub use ops::{divergence, norm_h1, normal_trace};
pub use scalar::ScalarBulkField;
pub use solve::{compatibility, solve_div_curl, solve_neumann_poisson, DEFAULT_TOL_COMPAT};
pub use toroidal::ToroidalField;
pub use vector::VectorField;
