//! Scalar arithmetic in one of two modes: exact rationals or `f64`.
//!
//! A computation is generic over [`Scalar`] and never mixes the two modes.
//! The exact mode is the default for anything that has to decide equality.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::Config;
use crate::matrix::SquareMatrix;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Element type of every matrix in the crate.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + for<'a> DivAssign<&'a Self>
    + Send
    + Sync
    + 'static
{
    /// True for the rational mode.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64(&self) -> f64;

    fn to_number(&self) -> Number;

    /// A literal in the matrix file syntax: `p/q`, an integer or a decimal.
    fn parse_literal(s: &str) -> Option<Self>;

    /// Float mode rejects NaN and infinities; exact mode is always finite.
    fn check_finite(self, op: &'static str) -> Result<Self>;

    /// Whether `self` counts as zero next to a quantity of size `scale`.
    /// Exact mode ignores the tolerance.
    fn negligible(&self, scale: f64, rel_tol: f64) -> bool;

    fn det_kernel(m: &SquareMatrix<Self>) -> Result<Self>;

    fn pf_kernel(m: &SquareMatrix<Self>, cfg: &Config) -> Result<Self>;

    /// Hafnian of an even-dimensional symmetric matrix within the cap.
    fn haf_kernel(m: &SquareMatrix<Self>, cfg: &Config) -> Self;

    fn absolute(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// `self += a * b`
    fn add_product(&mut self, a: &Self, b: &Self) {
        let mut t = a.clone();
        t *= b;
        *self += &t;
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_number(&self) -> Number {
        Number::Exact(self.clone())
    }

    fn parse_literal(s: &str) -> Option<Self> {
        parse_rational(s)
    }

    fn check_finite(self, _op: &'static str) -> Result<Self> {
        Ok(self)
    }

    fn negligible(&self, _scale: f64, _rel_tol: f64) -> bool {
        self.is_zero()
    }

    fn det_kernel(m: &SquareMatrix<Self>) -> Result<Self> {
        Ok(crate::matfun::det_bareiss(m))
    }

    fn pf_kernel(m: &SquareMatrix<Self>, cfg: &Config) -> Result<Self> {
        crate::matfun::pf_expansion(m, cfg)
    }

    fn haf_kernel(m: &SquareMatrix<Self>, cfg: &Config) -> Self {
        crate::matfun::haf_exact(m, cfg)
    }

    fn absolute(&self) -> Self {
        Signed::abs(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_number(&self) -> Number {
        Number::Float(*self)
    }

    fn parse_literal(s: &str) -> Option<Self> {
        match parse_rational(s) {
            Some(q) => Some(Scalar::to_f64(&q)),
            None => s.parse().ok().filter(|x: &f64| x.is_finite()),
        }
    }

    fn check_finite(self, op: &'static str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite { op })
        }
    }

    fn negligible(&self, scale: f64, rel_tol: f64) -> bool {
        f64::abs(*self) <= rel_tol * scale
    }

    fn det_kernel(m: &SquareMatrix<Self>) -> Result<Self> {
        crate::matfun::det_lu(m)
    }

    fn pf_kernel(m: &SquareMatrix<Self>, _cfg: &Config) -> Result<Self> {
        crate::matfun::pf_tridiagonal(m)
    }

    fn haf_kernel(m: &SquareMatrix<Self>, cfg: &Config) -> Self {
        crate::matfun::haf_float(m, cfg)
    }

    fn absolute(&self) -> Self {
        f64::abs(*self)
    }

    fn add_product(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

/// A scalar of either mode, used where values cross an I/O boundary.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => Scalar::to_f64(r),
            Number::Float(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(r) => write!(f, "{r}"),
            Number::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Number {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl FromStr for Number {
    type Err = Error;

    /// `p/q` or a plain integer parses as exact; anything else as a float.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("not a number: {s:?}"));
        if s.contains('/')
            || s.bytes()
                .all(|b| b.is_ascii_digit() || b == b'-' || b == b'+')
        {
            parse_rational(s).map(Number::Exact).ok_or_else(bad)
        } else {
            s.parse::<f64>().map(Number::Float).map_err(|_| bad())
        }
    }
}

/// Parses `p/q`, an integer, or a decimal literal (with optional exponent)
/// into the exact rational it denotes. `0.1` becomes `1/10`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let all: String = [int_part, frac_part].concat();
    let mut num: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse().ok()?
    };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_ratio(p, d)
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_rational("0.1"), Some(q(1, 10)));
        assert_eq!(parse_rational("-2.50"), Some(q(-5, 2)));
        assert_eq!(parse_rational("1e3"), Some(q(1000, 1)));
        assert_eq!(parse_rational("1.5E-2"), Some(q(3, 200)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("6/-4"), Some(q(-3, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1.2.3"), None);
    }

    #[test]
    fn reduced_with_positive_denominator() {
        let r = parse_rational("4/-6").unwrap();
        assert_eq!(r.denom(), &BigInt::from(3));
        assert_eq!(r.numer(), &BigInt::from(-2));
    }

    #[test]
    fn float_mode_rejects_non_finite() {
        assert!(f64::INFINITY.check_finite("t").is_err());
        assert!(f64::NAN.check_finite("t").is_err());
        assert_eq!(2.0f64.check_finite("t"), Ok(2.0));
    }

    #[test]
    fn number_round_trips_through_text() {
        for s in ["3", "-7/2", "0.25"] {
            let n: Number = s.parse().unwrap();
            let back: Number = n.to_string().parse().unwrap();
            assert_eq!(n, back);
        }
        assert!(matches!("3".parse::<Number>().unwrap(), Number::Exact(_)));
        assert!(matches!(
            "0.25".parse::<Number>().unwrap(),
            Number::Float(_)
        ));
    }
}
