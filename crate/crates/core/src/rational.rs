//! Exact rationals with arbitrary-size integers.
//!
//! `Rational` is always kept in lowest terms with a positive denominator. Its
//! text form is `p/q`; parsing additionally accepts plain integers and
//! decimal strings such as `-1.25`, which are converted exactly (no binary
//! floating point is involved).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse rational {input:?} at position {position}: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    /// Byte offset of the first offending character.
    pub position: usize,
    pub reason: &'static str,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `numer/denom` in canonical form. Panics if `denom` is zero.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    /// Skips the gcd; the caller guarantees `gcd(numer, denom) = 1` and
    /// `denom > 0`.
    pub(crate) fn from_coprime(numer: BigInt, denom: BigInt) -> Self {
        debug_assert!(denom.is_positive());
        Rational(BigRational::new_raw(numer, denom))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Exact value of a finite double (a dyadic rational). `None` for NaN and
    /// infinities.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rational(self.0.recip()))
        }
    }

    pub fn floor(&self) -> BigInt {
        self.numer().div_floor(self.denom())
    }

    /// Fractional part `x - floor(x)`, always in `[0, 1)`.
    pub fn fract(&self) -> Self {
        let q = self.floor();
        Rational(&self.0 - BigRational::from_integer(q))
    }

    pub fn to_f64(&self) -> f64 {
        // BigRational::to_f64 rounds correctly even when numerator and
        // denominator overflow f64 individually.
        self.0.to_f64().unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigUint> for Rational {
    fn from(n: BigUint) -> Self {
        Rational::from_integer(BigInt::from_biguint(Sign::Plus, n))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

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

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.0 == BigRational::from_integer(BigInt::from(*other))
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0.partial_cmp(&BigRational::from_integer(BigInt::from(*other)))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

fn parse_int(s: &str, offset: usize, input: &str) -> Result<BigInt, ParseRationalError> {
    let err = |position: usize, reason| ParseRationalError {
        input: input.to_string(),
        position,
        reason,
    };
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    let sign_len = s.len() - body.len();
    if body.is_empty() {
        return Err(err(offset + sign_len, "expected digits"));
    }
    if let Some(i) = body.find(|c: char| !c.is_ascii_digit()) {
        return Err(err(offset + sign_len + i, "unexpected character"));
    }
    let mag: BigInt = body.parse().map_err(|_| err(offset, "invalid integer"))?;
    Ok(if s.starts_with('-') { -mag } else { mag })
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let lead = input.len() - input.trim_start().len();
        let s = input.trim();
        let err = |position: usize, reason| ParseRationalError {
            input: input.to_string(),
            position,
            reason,
        };
        if s.is_empty() {
            return Err(err(0, "empty input"));
        }
        if let Some(slash) = s.find('/') {
            let p = parse_int(&s[..slash], lead, input)?;
            let q = parse_int(&s[slash + 1..], lead + slash + 1, input)?;
            if q.is_zero() {
                return Err(err(lead + slash + 1, "zero denominator"));
            }
            return Ok(Rational::new(p, q));
        }
        if let Some(dot) = s.find('.') {
            let int_part = &s[..dot];
            let frac_part = &s[dot + 1..];
            if let Some(i) = frac_part.find(|c: char| !c.is_ascii_digit()) {
                return Err(err(lead + dot + 1 + i, "unexpected character"));
            }
            let negative = int_part.starts_with('-');
            let int_digits = int_part.strip_prefix(['-', '+']).unwrap_or(int_part);
            if int_digits.is_empty() && frac_part.is_empty() {
                return Err(err(lead, "expected digits"));
            }
            let whole = if int_digits.is_empty() {
                BigInt::zero()
            } else {
                parse_int(int_digits, lead + (int_part.len() - int_digits.len()), input)?
            };
            let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
            let frac = if frac_part.is_empty() {
                BigInt::zero()
            } else {
                frac_part.parse::<BigInt>().map_err(|_| err(lead + dot + 1, "invalid digits"))?
            };
            let mag = whole * &scale + frac;
            let numer = if negative { -mag } else { mag };
            return Ok(Rational::new(numer, scale));
        }
        parse_int(s, lead, input).map(Rational::from_integer)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
