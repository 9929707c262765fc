use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Values the vertical operators act on: real profiles and complex mode amplitudes.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Default
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + Neg<Output = Self>
    + AddAssign
{
    fn abs2(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl Scalar for f64 {
    #[inline]
    fn abs2(self) -> f64 {
        self * self
    }
    #[inline]
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    #[inline]
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}
