//! Scalar abstraction shared by every numerical kernel.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::{ComplexField, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the library is generic over. Implemented for `f32` and `f64`.
///
/// Geometric tables (quadrature nodes, harmonic values, differentiation
/// matrices) are always built in `f64` and rounded once into `Self`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Debug + Display + LowerExp + Send + Sync
{
    /// Machine epsilon of the type.
    const EPS: f64;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("representable integer")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("finite value")
    }

    /// Absolute value (disambiguates `ComplexField::abs` from `Signed::abs`).
    #[inline]
    fn mag(self) -> Self {
        ComplexField::abs(self)
    }
}

impl Real for f32 {
    const EPS: f64 = f32::EPSILON as f64;
}

impl Real for f64 {
    const EPS: f64 = f64::EPSILON;
}
