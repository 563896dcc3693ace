/// Vector-space operators for types exposing `axpy` and `scale`.
macro_rules! impl_linear_ops {
    ($ty:ident) => {
        impl<T: $crate::real::Real> std::ops::Add for &$ty<T> {
            type Output = $ty<T>;
            fn add(self, rhs: Self) -> $ty<T> {
                let mut out = self.clone();
                out.axpy(T::one(), rhs);
                out
            }
        }

        impl<T: $crate::real::Real> std::ops::Sub for &$ty<T> {
            type Output = $ty<T>;
            fn sub(self, rhs: Self) -> $ty<T> {
                let mut out = self.clone();
                out.axpy(-T::one(), rhs);
                out
            }
        }

        impl<T: $crate::real::Real> std::ops::Add for $ty<T> {
            type Output = $ty<T>;
            fn add(mut self, rhs: Self) -> $ty<T> {
                self.axpy(T::one(), &rhs);
                self
            }
        }

        impl<T: $crate::real::Real> std::ops::Sub for $ty<T> {
            type Output = $ty<T>;
            fn sub(mut self, rhs: Self) -> $ty<T> {
                self.axpy(-T::one(), &rhs);
                self
            }
        }

        impl<T: $crate::real::Real> std::ops::AddAssign<&$ty<T>> for $ty<T> {
            fn add_assign(&mut self, rhs: &$ty<T>) {
                self.axpy(T::one(), rhs);
            }
        }

        impl<T: $crate::real::Real> std::ops::SubAssign<&$ty<T>> for $ty<T> {
            fn sub_assign(&mut self, rhs: &$ty<T>) {
                self.axpy(-T::one(), rhs);
            }
        }

        impl<T: $crate::real::Real> std::ops::Mul<T> for &$ty<T> {
            type Output = $ty<T>;
            fn mul(self, c: T) -> $ty<T> {
                self.scale(c)
            }
        }

        impl<T: $crate::real::Real> std::ops::Neg for &$ty<T> {
            type Output = $ty<T>;
            fn neg(self) -> $ty<T> {
                self.scale(-T::one())
            }
        }
    };
}
