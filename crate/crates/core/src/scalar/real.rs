use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use super::DoubleDouble;

/// The arithmetic the dynamics needs, implemented for `f64` (fast scans and
/// warm starts) and [`DoubleDouble`] (everything that must meet the
/// extended-precision contract).
pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Mul<f64, Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn from_scalar(x: DoubleDouble) -> Self;
    fn to_f64(self) -> f64;
    fn to_scalar(self) -> DoubleDouble;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn floor(self) -> Self;
    fn round(self) -> Self;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
    /// `(sin 2πx, cos 2πx)`.
    fn sin_cos_2pi(self) -> (Self, Self);
    fn two_pi() -> Self;
    fn is_finite(self) -> bool;
}

impl Real for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn from_scalar(x: DoubleDouble) -> Self {
        x.to_f64()
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn to_scalar(self) -> DoubleDouble {
        DoubleDouble::from_f64(self)
    }
    #[inline]
    fn floor(self) -> Self {
        f64::floor(self)
    }
    #[inline]
    fn round(self) -> Self {
        f64::round(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sin_cos_2pi(self) -> (Self, Self) {
        let r = self - self.round();
        (std::f64::consts::TAU * r).sin_cos()
    }
    #[inline]
    fn two_pi() -> Self {
        std::f64::consts::TAU
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Real for DoubleDouble {
    #[inline]
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    #[inline]
    fn from_scalar(x: DoubleDouble) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    #[inline]
    fn to_scalar(self) -> DoubleDouble {
        self
    }
    #[inline]
    fn floor(self) -> Self {
        DoubleDouble::floor(self)
    }
    #[inline]
    fn round(self) -> Self {
        DoubleDouble::round(self)
    }
    #[inline]
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    #[inline]
    fn ln(self) -> Self {
        DoubleDouble::ln(self)
    }
    #[inline]
    fn sin_cos_2pi(self) -> (Self, Self) {
        DoubleDouble::sin_cos_2pi(self)
    }
    #[inline]
    fn two_pi() -> Self {
        super::dd::TWO_PI
    }
    #[inline]
    fn is_finite(self) -> bool {
        DoubleDouble::is_finite(self)
    }
}
