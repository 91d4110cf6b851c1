//! Double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` of two `f64` with `|lo| <= ulp(hi)/2`.
//! This gives 106 bits of significand and a relative machine precision
//! (unit roundoff) of `2^-107 ≈ 6.2e-33`. The basic operations follow the
//! error-free transformations of Dekker and Knuth; multiplication uses FMA.

use std::cmp::Ordering;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

#[derive(Clone, Copy, Debug, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline(always)]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline(always)]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline(always)]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

/// 2π as a double-double.
pub const TWO_PI: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::TAU,
    lo: 2.449_293_598_294_706_4e-16,
};
pub const PI: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::PI,
    lo: 1.224_646_799_147_353_2e-16,
};
pub const LN_2: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl DoubleDouble {
    /// Relative machine precision `2^-107`.
    pub const EPSILON: f64 = 6.162_975_822_039_155e-33;
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const NAN: Self = Self {
        hi: f64::NAN,
        lo: f64::NAN,
    };

    /// Builds a value from two components, renormalizing them.
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact conversion of any `i64`.
    pub fn from_i64(n: i64) -> Self {
        let hi = n as f64;
        // `hi` may be rounded; the remainder is exact in i128.
        let lo = (n as i128 - hi as i128) as f64;
        Self::new(hi, lo)
    }

    /// Exact conversion of any `u64`.
    pub fn from_u64(n: u64) -> Self {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Self::new(hi, lo)
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn is_nan(self) -> bool {
        self.hi.is_nan() || self.lo.is_nan()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    #[inline]
    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.is_sign_negative() {
            -self
        } else {
            self
        }
    }

    #[inline]
    fn add_f64(self, b: f64) -> Self {
        let (s1, s2) = two_sum(self.hi, b);
        let s2 = s2 + self.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Self { hi, lo }
    }

    #[inline]
    fn add_dd(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Self { hi, lo }
    }

    #[inline]
    fn mul_f64(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        let p2 = self.lo.mul_add(b, p2);
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }

    #[inline]
    fn mul_dd(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }

    fn div_dd(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 }.add_f64(q3)
    }

    fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let (p1, p2) = two_prod(q1, b);
        let (s, e) = two_sum(self.hi, -p1);
        let e = e + self.lo - p2;
        let q2 = (s + e) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }
    }

    #[inline]
    pub fn sqr(self) -> Self {
        let (p1, p2) = two_prod(self.hi, self.hi);
        let p2 = p2 + 2.0 * self.hi * self.lo;
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }

    /// Multiplication by a power of two (exact).
    #[inline]
    pub fn mul_pow2(self, scale: f64) -> Self {
        Self {
            hi: self.hi * scale,
            lo: self.lo * scale,
        }
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    pub fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            Self::new(hi, self.lo.floor())
        } else {
            Self { hi, lo: 0.0 }
        }
    }

    pub fn ceil(self) -> Self {
        -(-self).floor()
    }

    /// Nearest integer, ties away from zero.
    pub fn round(self) -> Self {
        let hi = self.hi.round();
        if hi == self.hi {
            Self::new(hi, self.lo.round())
        } else if (hi - self.hi).abs() == 0.5 && self.lo != 0.0 {
            // Tie in `hi` broken by the sign of `lo`.
            let alt = if self.lo < 0.0 { self.hi.floor() } else { self.hi.ceil() };
            Self { hi: alt, lo: 0.0 }
        } else {
            Self { hi, lo: 0.0 }
        }
    }

    /// Fractional part in `[0, 1)`.
    pub fn fract_floor(self) -> Self {
        let r = self - self.floor();
        if r >= Self::ONE {
            r - Self::ONE
        } else if r.is_sign_negative() {
            Self::ZERO
        } else {
            r
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Self::ZERO;
        }
        if self.hi < 0.0 {
            return Self::NAN;
        }
        // Two Newton corrections from the f64 root.
        let mut y = Self::from_f64(self.hi.sqrt());
        for _ in 0..2 {
            y += (self - y.sqr()) / y.mul_pow2(2.0);
        }
        y
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        if self.hi == 0.0 {
            return Self::ONE;
        }
        let k = (self.hi / LN_2.hi).round();
        let r = (self - LN_2 * k).mul_pow2(1.0 / 512.0);
        // exp(r) - 1 by Taylor series, |r| < 7e-4.
        let inv = inv_factorials();
        let mut s = r;
        let mut p = r.sqr();
        s += p.mul_pow2(0.5);
        for c in inv.iter().skip(3) {
            p *= r;
            let t = p * *c;
            s += t;
            if t.hi.abs() < 1e-35 * s.hi.abs() {
                break;
            }
        }
        // (1 + s)^512 - 1
        for _ in 0..9 {
            s = s.mul_pow2(2.0) + s.sqr();
        }
        let e = s + Self::ONE;
        e.mul_pow2(2f64.powi(k as i32))
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Self::NAN;
        }
        if self == Self::ONE {
            return Self::ZERO;
        }
        let x = Self::from_f64(self.hi.ln());
        x + self * (-x).exp() - Self::ONE
    }

    /// `(sin 2πx, cos 2πx)` with argument reduction modulo 1.
    pub fn sin_cos_2pi(self) -> (Self, Self) {
        let r = self - self.round();
        // r in [-1/2, 1/2]; split off the nearest multiple of 1/256.
        let j = (r.hi * TABLE_SIZE as f64).round();
        let s = r - Self::from_f64(j / TABLE_SIZE as f64);
        let theta = s * TWO_PI;
        let (st, ct) = taylor_sin_cos(theta);
        let (sj, cj) = table_entry(j as i64);
        let sin = sj * ct + cj * st;
        let cos = cj * ct - sj * st;
        (sin, cos)
    }

    /// `(sin θ, cos θ)` for an arbitrary angle in radians.
    pub fn sin_cos(self) -> (Self, Self) {
        (self / TWO_PI).sin_cos_2pi()
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

const TABLE_SIZE: usize = 256;

struct TrigTables {
    /// sin/cos of 2πj/256 for j = 0..=128.
    sin: Vec<DoubleDouble>,
    cos: Vec<DoubleDouble>,
}

fn inv_factorials() -> &'static [DoubleDouble; 24] {
    static INV_FACT: OnceLock<[DoubleDouble; 24]> = OnceLock::new();
    INV_FACT.get_or_init(|| {
        let mut out = [DoubleDouble::ZERO; 24];
        let mut f = DoubleDouble::ONE;
        for (k, slot) in out.iter_mut().enumerate() {
            if k > 0 {
                f *= k as f64;
            }
            *slot = DoubleDouble::ONE / f;
        }
        out
    })
}

// Taylor series valid for |θ| <= 2π/512.
#[inline]
fn taylor_sin_cos(theta: DoubleDouble) -> (DoubleDouble, DoubleDouble) {
    if theta.hi == 0.0 {
        return (DoubleDouble::ZERO, DoubleDouble::ONE);
    }
    let inv = inv_factorials();
    let t2 = theta.sqr();
    let mut s = inv[13];
    for k in (0..=5).rev() {
        s = inv[2 * k + 1] - t2 * s;
    }
    let sin = theta * s;
    let mut c = inv[12];
    for k in (0..=5).rev() {
        c = inv[2 * k] - t2 * c;
    }
    let cos = c;
    (sin, cos)
}

fn tables() -> &'static TrigTables {
    static TABLES: OnceLock<TrigTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let quarter = TABLE_SIZE / 4; // 64: angle π/2
        let eighth = TABLE_SIZE / 8; // 32: angle π/4
        let mut sin = vec![DoubleDouble::ZERO; TABLE_SIZE / 2 + 1];
        let mut cos = vec![DoubleDouble::ZERO; TABLE_SIZE / 2 + 1];
        for j in 0..=eighth {
            let angle = TWO_PI * (j as f64 / TABLE_SIZE as f64);
            let (s, c) = long_taylor(angle);
            sin[j] = s;
            cos[j] = c;
        }
        for j in eighth + 1..=quarter {
            sin[j] = cos[quarter - j];
            cos[j] = sin[quarter - j];
        }
        for j in quarter + 1..=TABLE_SIZE / 2 {
            sin[j] = sin[TABLE_SIZE / 2 - j];
            cos[j] = -cos[TABLE_SIZE / 2 - j];
        }
        TrigTables { sin, cos }
    })
}

// Direct series for |θ| <= π/4, only used to build the table.
fn long_taylor(theta: DoubleDouble) -> (DoubleDouble, DoubleDouble) {
    let mut sin = DoubleDouble::ZERO;
    let mut cos = DoubleDouble::ZERO;
    let mut term = DoubleDouble::ONE;
    for k in 0..60 {
        if k > 0 {
            term = term * theta / (k as f64);
        }
        match k % 4 {
            0 => cos += term,
            1 => sin += term,
            2 => cos -= term,
            _ => sin -= term,
        }
        if term.hi.abs() < 1e-40 {
            break;
        }
    }
    (sin, cos)
}

#[inline]
fn table_entry(j: i64) -> (DoubleDouble, DoubleDouble) {
    let t = tables();
    let idx = j.unsigned_abs() as usize;
    if j < 0 {
        (-t.sin[idx], t.cos[idx])
    } else {
        (t.sin[idx], t.cos[idx])
    }
}

impl PartialEq for DoubleDouble {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl From<i64> for DoubleDouble {
    fn from(n: i64) -> Self {
        Self::from_i64(n)
    }
}

impl From<i32> for DoubleDouble {
    fn from(n: i32) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

macro_rules! impl_binops {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign:ident, $dd:ident, $f:ident) => {
        impl $trait for DoubleDouble {
            type Output = Self;
            #[inline]
            fn $method(self, rhs: Self) -> Self {
                self.$dd(rhs)
            }
        }
        impl $trait<f64> for DoubleDouble {
            type Output = Self;
            #[inline]
            fn $method(self, rhs: f64) -> Self {
                self.$f(rhs)
            }
        }
        impl $assign_trait for DoubleDouble {
            #[inline]
            fn $assign(&mut self, rhs: Self) {
                *self = self.$dd(rhs);
            }
        }
        impl $assign_trait<f64> for DoubleDouble {
            #[inline]
            fn $assign(&mut self, rhs: f64) {
                *self = self.$f(rhs);
            }
        }
    };
}

impl DoubleDouble {
    #[inline]
    fn sub_dd(self, b: Self) -> Self {
        self.add_dd(-b)
    }
    #[inline]
    fn sub_f64(self, b: f64) -> Self {
        self.add_f64(-b)
    }
}

impl_binops!(Add, add, AddAssign, add_assign, add_dd, add_f64);
impl_binops!(Sub, sub, SubAssign, sub_assign, sub_dd, sub_f64);
impl_binops!(Mul, mul, MulAssign, mul_assign, mul_dd, mul_f64);
impl_binops!(Div, div, DivAssign, div_assign, div_dd, div_f64);

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a DoubleDouble> for DoubleDouble {
    fn sum<I: Iterator<Item = &'a Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + *b)
    }
}
