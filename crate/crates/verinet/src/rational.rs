//! Exact rational scalars.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An arbitrary-precision fraction kept in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Rational {
        let d: BigInt = denom.into();
        assert!(!d.is_zero(), "zero denominator");
        Rational(BigRational::new(numer.into(), d))
    }

    pub fn from_int(n: i64) -> Rational {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Rational {
        Rational(BigRational::from_integer(n))
    }

    pub fn zero() -> Rational {
        Rational(BigRational::zero())
    }

    pub fn one() -> Rational {
        Rational(BigRational::one())
    }

    pub fn half() -> Rational {
        Rational::new(1, 2)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    pub fn signum(&self) -> i32 {
        match self.0.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn recip(&self) -> Rational {
        Rational(self.0.recip())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn max(&self, other: &Rational) -> Rational {
        if self >= other { self.clone() } else { other.clone() }
    }

    pub fn min(&self, other: &Rational) -> Rational {
        if self <= other { self.clone() } else { other.clone() }
    }

    /// ReLU on rationals.
    pub fn relu(&self) -> Rational {
        if self.is_positive() { self.clone() } else { Rational::zero() }
    }

    /// 2^e for a (possibly negative) exponent.
    pub fn pow2(e: i64) -> Rational {
        let p = BigInt::one() << e.unsigned_abs();
        if e >= 0 {
            Rational::from_bigint(p)
        } else {
            Rational(BigRational::new(BigInt::one(), p))
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            if self.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY }
        })
    }

    /// Exact conversion of a finite double.
    pub fn from_f64(x: f64) -> Option<Rational> {
        BigRational::from_float(x).map(Rational)
    }

    /// Encoding length of `m/n` in lowest terms, counted as
    /// `1 + ceil(log2(|m|+1) + 1) + ceil(log2(n+1) + 1)`.
    pub fn size(&self) -> u64 {
        fn part(v: &BigInt) -> u64 {
            // ceil(log2(v + 1)) + 1, computed on integers.
            let w: BigInt = v + 1u32;
            let bits = w.bits();
            let exact_power = (&w & (&w - 1u32)).is_zero();
            let ceil_log = if exact_power { bits - 1 } else { bits };
            ceil_log + 1
        }
        1 + part(&self.numer().abs()) + part(self.denom())
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn from_big(r: BigRational) -> Rational {
        Rational(r)
    }

    /// Parses `"p/q"`, an integer, or a finite decimal such as `"-0.125"`.
    pub fn parse(text: &str) -> Result<Rational> {
        let s = text.trim();
        let bad = || Error::Invalid(format!("not a rational literal: {text:?}"));
        if s.is_empty() {
            return Err(bad());
        }
        if let Some((p, q)) = s.split_once('/') {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Invalid(format!("zero denominator in {text:?}")));
            }
            return Ok(Rational(BigRational::new(p, q)));
        }
        let (neg, body) = match s.as_bytes()[0] {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let mag = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10u32), frac_part.len());
        let v = BigRational::new(if neg { -mag } else { mag }, scale);
        Ok(Rational(v))
    }
}

impl FromStr for Rational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Rational> {
        Rational::parse(s)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Rational {
        Rational::from_int(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Rational {
        Rational::from_int(n as i64)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        // Accept strings (exact) and JSON integers; reject floats to avoid silent rounding.
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => Rational::parse(&s).map_err(serde::de::Error::custom),
            serde_json::Value::Number(n) if n.is_i64() => Ok(Rational::from_int(n.as_i64().unwrap())),
            other => Err(serde::de::Error::custom(format!(
                "expected a rational string, found {other}"
            ))),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $assign_tr:ident, $assign_m:ident) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, o: Rational) -> Rational {
                Rational(self.0.$m(o.0))
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $m(self, o: &'a Rational) -> Rational {
                Rational(self.0.$m(&o.0))
            }
        }
        impl<'a> $tr<Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, o: Rational) -> Rational {
                Rational((&self.0).$m(o.0))
            }
        }
        impl<'a, 'b> $tr<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, o: &'b Rational) -> Rational {
                Rational((&self.0).$m(&o.0))
            }
        }
        impl $assign_tr<Rational> for Rational {
            fn $assign_m(&mut self, o: Rational) {
                self.0 = std::mem::take(&mut self.0).$m(o.0);
            }
        }
        impl<'a> $assign_tr<&'a Rational> for Rational {
            fn $assign_m(&mut self, o: &'a Rational) {
                self.0 = std::mem::take(&mut self.0).$m(&o.0);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);

impl Div<Rational> for Rational {
    type Output = Rational;
    fn div(self, o: Rational) -> Rational {
        Rational(self.0 / o.0)
    }
}

impl<'b> Div<&'b Rational> for &Rational {
    type Output = Rational;
    fn div(self, o: &'b Rational) -> Rational {
        Rational(&self.0 / &o.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

/// Greatest common divisor of two non-negative big integers.
pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

/// Shorthand constructor used heavily in tests and builders.
pub fn q(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

/// Parses a literal, panicking on malformed input. Intended for constants in code.
pub fn r(text: &str) -> Rational {
    Rational::parse(text).expect("valid rational literal")
}
