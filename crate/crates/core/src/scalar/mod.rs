//! Extended-precision scalar type.
//!
//! [`Scalar`] is a double-double number. It is the representation used for
//! every quantity that has to survive the exponential error growth of the
//! dynamics; `f64` is only used for coarse scans through the [`Real`] trait.

mod dd;
mod fmt;
mod real;

pub use dd::{DoubleDouble, LN_2, PI, TWO_PI};
pub use fmt::{ParseScalarError, CSV_DIGITS};
pub use real::Real;

pub type Scalar = DoubleDouble;

/// Shorthand for building a [`Scalar`] from an `f64` literal.
#[inline]
pub fn s(x: f64) -> Scalar {
    Scalar::from_f64(x)
}
