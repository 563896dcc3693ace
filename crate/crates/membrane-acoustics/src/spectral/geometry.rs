use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryKind {
    Ball,
    Shell,
}

/// Which boundary sphere a trace lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Inner sphere r = a (shell only), rigid wall.
    Gamma0,
    /// Outer sphere r = b, carries the membrane.
    Gamma1,
}

/// Ball of radius `b`, or spherical shell `a < r < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry<T> {
    kind: GeometryKind,
    a: T,
    b: T,
}

impl<T: Real> Geometry<T> {
    pub fn ball(b: T) -> Result<Self> {
        if !(b > T::zero()) || !b.is_finite() {
            return Err(Error::Geometry(format!("outer radius must be positive, got {b}")));
        }
        Ok(Self { kind: GeometryKind::Ball, a: T::zero(), b })
    }

    pub fn shell(a: T, b: T) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Geometry(format!("inner radius must be positive, got {a}")));
        }
        if !(b > a) {
            return Err(Error::Geometry(format!("need a < b, got a = {a}, b = {b}")));
        }
        Ok(Self { kind: GeometryKind::Shell, a, b })
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn is_shell(&self) -> bool {
        self.kind == GeometryKind::Shell
    }

    /// Inner radius; zero for the ball.
    pub fn inner_radius(&self) -> T {
        self.a
    }

    pub fn outer_radius(&self) -> T {
        self.b
    }

    pub fn volume(&self) -> T {
        T::lit(4.0 / 3.0) * T::pi() * (self.b.powi(3) - self.a.powi(3))
    }

    pub fn area_gamma1(&self) -> T {
        T::lit(4.0) * T::pi() * self.b * self.b
    }

    /// Area of the inner sphere; zero for the ball.
    pub fn area_gamma0(&self) -> T {
        T::lit(4.0) * T::pi() * self.a * self.a
    }

    /// Radius of a boundary sphere; errors for Γ0 on the ball.
    pub fn boundary_radius(&self, which: Boundary) -> Result<T> {
        match which {
            Boundary::Gamma1 => Ok(self.b),
            Boundary::Gamma0 if self.is_shell() => Ok(self.a),
            Boundary::Gamma0 => Err(Error::Geometry("the ball has no inner boundary Γ0".into())),
        }
    }

    pub fn cast<U: Real>(&self) -> Geometry<U> {
        Geometry { kind: self.kind, a: U::lit(self.a.as_f64()), b: U::lit(self.b.as_f64()) }
    }
}
