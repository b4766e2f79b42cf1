//! Double-double (`hi + lo`) arithmetic for fractional Doppler observables.
//!
//! A fractional shift near `4e-5` carries the conformal signal in its
//! 13th significant digit and beyond. Storing it as an unevaluated pair of
//! doubles keeps roughly 32 significant digits, so `c * frac - v` recovers the
//! `α r` residual without cancellation loss. Decimal conversion is exact
//! (through big rationals) and prints 34 significant digits.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Significant digits written by [`DoubleDouble`]'s `Display`.
pub const DECIMAL_DIGITS: usize = 34;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact sum of two doubles.
    pub fn sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Self { hi, lo }
    }

    /// Exact product of two doubles.
    pub fn product(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Self { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn add_f64(self, x: f64) -> Self {
        let (s, e) = two_sum(self.hi, x);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Self { hi, lo }
    }

    pub fn sub_f64(self, x: f64) -> Self {
        self.add_f64(-x)
    }

    pub fn mul_f64(self, x: f64) -> Self {
        let (p, e) = two_prod(self.hi, x);
        let (hi, lo) = quick_two_sum(p, e + self.lo * x);
        Self { hi, lo }
    }

    pub fn div_f64(self, x: f64) -> Self {
        let q1 = self.hi / x;
        // remainder self - q1 * x, carried in double-double
        let rem = self - Self::product(q1, x);
        let q2 = rem.hi / x;
        let rem = rem - Self::product(q2, x);
        let q3 = rem.hi / x;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }.add_f64(q3)
    }

    fn to_ratio(self) -> Option<BigRational> {
        let hi = BigRational::from_float(self.hi)?;
        let lo = BigRational::from_float(self.lo)?;
        Some(hi + lo)
    }

    fn from_ratio(value: &BigRational, nearest: f64) -> Self {
        let rem = value - BigRational::from_float(nearest).expect("finite");
        let lo = rem.to_f64().unwrap_or(0.0);
        let (hi, lo) = quick_two_sum(nearest, lo);
        Self { hi, lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        let (t, f) = two_sum(self.lo, other.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;

    fn sub(self, other: Self) -> Self {
        self + (-other)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(value) = self.to_ratio() else {
            return write!(f, "{}", self.hi);
        };
        let digits = DECIMAL_DIGITS as i32;
        if value.is_zero() {
            return write!(f, "0.{}e0", "0".repeat(DECIMAL_DIGITS - 1));
        }
        let sign = if value.is_negative() { "-" } else { "" };
        let magnitude = value.abs();
        let ten = BigRational::from_integer(BigInt::from(10));
        let lower = num_traits::pow(BigInt::from(10), DECIMAL_DIGITS - 1);
        let upper = &lower * BigInt::from(10);

        let mut exp10 = self.hi.abs().log10().floor() as i32;
        let mantissa = loop {
            let shift = digits - 1 - exp10;
            let scale = if shift >= 0 {
                num_traits::pow(ten.clone(), shift as usize)
            } else {
                BigRational::one() / num_traits::pow(ten.clone(), (-shift) as usize)
            };
            let scaled = (&magnitude * scale).round().to_integer();
            if scaled >= upper {
                exp10 += 1;
            } else if scaled < lower {
                exp10 -= 1;
            } else {
                break scaled;
            }
        };
        let text = mantissa.to_string();
        write!(f, "{sign}{}.{}e{exp10}", &text[..1], &text[1..])
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if (int_part.is_empty() && frac_part.is_empty()) || exponent.abs() > 1000 {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let shift = exponent - frac_part.len() as i32 - 1;
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut value = BigRational::from_integer(digits);
    if shift >= 0 {
        value *= num_traits::pow(ten, shift as usize);
    } else {
        value /= num_traits::pow(ten, (-shift) as usize);
    }
    Some(if negative { -value } else { value })
}

impl FromStr for DoubleDouble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidInput(format!("not a decimal number: `{s}`"));
        let value = parse_decimal(s).ok_or_else(bad)?;
        let nearest: f64 = s.trim().parse().map_err(|_| bad())?;
        if !nearest.is_finite() {
            return Err(bad());
        }
        Ok(Self::from_ratio(&value, nearest))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exact(x: DoubleDouble) -> BigRational {
        x.to_ratio().unwrap()
    }

    #[test]
    fn sum_and_product_are_exact() {
        let s = DoubleDouble::sum(1.0, 1e-20);
        assert_eq!(s.hi(), 1.0);
        assert_eq!(s.lo(), 1e-20);
        let a = 1.0 + f64::EPSILON;
        let p = DoubleDouble::product(a, a);
        let want = BigRational::from_float(a).unwrap().pow(2);
        assert_eq!(exact(p), want);
    }

    #[test]
    fn recovers_small_signal_after_division() {
        let c = crate::SPEED_OF_LIGHT;
        let v = 12_000.0;
        let signal = 9.855e-6;
        let frac = DoubleDouble::sum(v, signal).div_f64(c);
        let back = frac.mul_f64(c).sub_f64(v).to_f64();
        assert!((back - signal).abs() < 1e-25, "{back}");
    }

    #[test]
    fn display_has_34_digits() {
        let x = DoubleDouble::sum(4.0e-5, 3.2e-23);
        let s = x.to_string();
        let mantissa = s.split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), DECIMAL_DIGITS);
        let x = DoubleDouble::sum(0.5, 2f64.powi(-60));
        assert_eq!(x.to_string(), "5.000000000000000008673617379884035e-1");
        assert_eq!((-x).to_string(), "-5.000000000000000008673617379884035e-1");
        assert_eq!(
            DoubleDouble::ZERO.to_string(),
            format!("0.{}e0", "0".repeat(33))
        );
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in [
            "",
            "abc",
            "1.2.3",
            "1e",
            "--1",
            "nan",
            "inf",
            "1e400",
            "1e-999999999",
        ] {
            assert!(bad.parse::<DoubleDouble>().is_err(), "{bad}");
        }
        assert_eq!("-2.5".parse::<DoubleDouble>().unwrap().to_f64(), -2.5);
        assert_eq!("3".parse::<DoubleDouble>().unwrap().to_f64(), 3.0);
        assert_eq!(".5e1".parse::<DoubleDouble>().unwrap().to_f64(), 5.0);
    }

    proptest! {
        #[test]
        fn decimal_round_trip_keeps_32_digits(hi in -1e3f64..1e3, rel_lo in -0.5f64..0.5, exp in -30i32..30) {
            prop_assume!(hi != 0.0);
            let scale = 10f64.powi(exp);
            let hi = hi * scale;
            let lo = rel_lo * hi.abs() * f64::EPSILON;
            let x = DoubleDouble::new(hi, lo);
            let y: DoubleDouble = x.to_string().parse().unwrap();
            let err = (exact(x) - exact(y)).abs();
            let bound = exact(x).abs() * BigRational::new(BigInt::from(1), num_traits::pow(BigInt::from(10), 32));
            prop_assert!(err <= bound);
        }

        #[test]
        fn add_then_subtract_round_trips(a in -1e6f64..1e6, b in -1e-6f64..1e-6) {
            let x = DoubleDouble::sum(a, b);
            let y = x.add_f64(1.2345).sub_f64(1.2345);
            prop_assert!((y - x).to_f64().abs() <= 1e-28 * a.abs().max(1.0));
        }
    }
}
