//! Decimal conversion for [`DoubleDouble`].

use std::fmt;
use std::str::FromStr;

use super::DoubleDouble;

/// Significant digits written by [`DoubleDouble::to_sci_string`] callers in this crate.
pub const CSV_DIGITS: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid decimal number: {0:?}")]
pub struct ParseScalarError(pub String);

fn pow10(e: i32) -> DoubleDouble {
    DoubleDouble::from_f64(10.0).powi(e)
}

impl DoubleDouble {
    /// Scientific notation with `digits` significant digits, e.g. `8.0193…e-1`.
    pub fn to_sci_string(self, digits: usize) -> String {
        let digits = digits.clamp(1, 34);
        if self.is_nan() {
            return "NaN".to_owned();
        }
        if !self.is_finite() {
            return if self.hi() > 0.0 { "inf" } else { "-inf" }.to_owned();
        }
        if self.is_zero() {
            return format!("{}e0", zero_mantissa(digits));
        }
        let negative = self.is_sign_negative();
        let a = self.abs();
        let mut e = a.hi().abs().log10().floor() as i32;
        let mut r = if e >= 0 { a / pow10(e) } else { a * pow10(-e) };
        if r >= DoubleDouble::from_f64(10.0) {
            r /= 10.0;
            e += 1;
        } else if r < DoubleDouble::ONE {
            r *= 10.0;
            e -= 1;
        }
        // One guard digit for rounding.
        let n = digits + 1;
        let mut d = vec![0i32; n];
        for slot in d.iter_mut() {
            let q = r.floor();
            *slot = q.hi() as i32;
            r = (r - q) * 10.0;
        }
        // Fix digits pushed out of range by rounding in `r`.
        for i in (1..n).rev() {
            if d[i] < 0 {
                d[i] += 10;
                d[i - 1] -= 1;
            } else if d[i] > 9 {
                d[i] -= 10;
                d[i - 1] += 1;
            }
        }
        if d[n - 1] >= 5 {
            d[n - 2] += 1;
            let mut i = n - 2;
            while i > 0 && d[i] > 9 {
                d[i] -= 10;
                d[i - 1] += 1;
                i -= 1;
            }
        }
        d.truncate(digits);
        if d[0] > 9 {
            d[0] = 1;
            for x in d.iter_mut().skip(1) {
                *x = 0;
            }
            e += 1;
        } else if d[0] <= 0 {
            // Leading digit lost to a downward fix-up; shift left.
            d.remove(0);
            d.push(0);
            e -= 1;
        }
        let mut s = String::with_capacity(digits + 8);
        if negative {
            s.push('-');
        }
        s.push(char::from(b'0' + d[0] as u8));
        if digits > 1 {
            s.push('.');
            for &x in &d[1..] {
                s.push(char::from(b'0' + x as u8));
            }
        }
        s.push('e');
        s.push_str(&e.to_string());
        s
    }

    /// Parses plain or scientific decimal notation with full double-double accuracy.
    pub fn parse_decimal(text: &str) -> Result<Self, ParseScalarError> {
        let err = || ParseScalarError(text.to_owned());
        let t = text.trim();
        if t.is_empty() {
            return Err(err());
        }
        let (negative, body) = match t.as_bytes()[0] {
            b'-' => (true, &t[1..]),
            b'+' => (false, &t[1..]),
            _ => (false, t),
        };
        let lower = body.to_ascii_lowercase();
        if lower == "inf" || lower == "infinity" {
            let v = Self::from_f64(f64::INFINITY);
            return Ok(if negative { -v } else { v });
        }
        if lower == "nan" {
            return Ok(Self::NAN);
        }
        let (mantissa, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| err())?),
            None => (body, 0),
        };
        let mut value = Self::ZERO;
        let mut frac_digits = 0i32;
        let mut seen_point = false;
        let mut seen_digit = false;
        for c in mantissa.chars() {
            match c {
                '0'..='9' => {
                    seen_digit = true;
                    value = value * 10.0 + f64::from(c as u8 - b'0');
                    if seen_point {
                        frac_digits += 1;
                    }
                }
                '.' if !seen_point => seen_point = true,
                '_' => {}
                _ => return Err(err()),
            }
        }
        if !seen_digit {
            return Err(err());
        }
        let e = exp - frac_digits;
        let v = match e.cmp(&0) {
            std::cmp::Ordering::Equal => value,
            std::cmp::Ordering::Greater => value * pow10(e),
            std::cmp::Ordering::Less => value / pow10(-e),
        };
        Ok(if negative { -v } else { v })
    }
}

fn zero_mantissa(digits: usize) -> String {
    if digits == 1 {
        "0".to_owned()
    } else {
        format!("0.{}", "0".repeat(digits - 1))
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(CSV_DIGITS);
        f.write_str(&self.to_sci_string(digits))
    }
}

impl FromStr for DoubleDouble {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_decimal(s)
    }
}
