//! Exact fractions over arbitrary-precision integers.
//!
//! [`Rational`] is always kept in canonical form: the denominator is
//! positive and shares no factor with the numerator. Every quantity on the
//! sampling path (series terms, error bounds, partial sums, quantized
//! interval endpoints) is a `Rational`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact fraction `num/den` with `den > 0` and `gcd(|num|, den) = 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `n/d` in canonical form.
    pub fn new(n: impl Into<BigInt>, d: impl Into<BigInt>) -> Result<Self> {
        let d = d.into();
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(n.into(), d)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    /// `2^{-k}`.
    pub fn dyadic(k: u64) -> Self {
        let exp = usize::try_from(k).expect("exponent fits in usize");
        Rational(BigRational::new(BigInt::one(), BigInt::one() << exp))
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

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    /// Exact integer power. `0^e` with `e < 0` is an error; `x^0 = 1`.
    pub fn pow(&self, e: i64) -> Result<Rational> {
        if e < 0 && self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let magnitude = i32::try_from(e.unsigned_abs()).map_err(|_| Error::Domain {
            what: format!("exponent {e} out of range"),
        })?;
        let p = num_traits::pow::Pow::pow(&self.0, magnitude);
        if e < 0 {
            Ok(Rational(p.recip()))
        } else {
            Ok(Rational(p))
        }
    }

    pub fn min(self, other: Rational) -> Rational {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Lossy decimal approximation, for reporting only.
    pub fn to_f64_approx(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `"n/d"` or a bare integer.
    fn from_str(s: &str) -> Result<Self> {
        let parse_int = |t: &str| {
            t.trim().parse::<BigInt>().map_err(|_| Error::Parse {
                input: s.to_string(),
            })
        };
        match s.split_once('/') {
            Some((n, d)) => Rational::new(parse_int(n)?, parse_int(d)?),
            None => Ok(Rational::from_integer(parse_int(s)?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::from_integer(n)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }

        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }

        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

/// Exact three-way comparison.
pub fn compare(a: &Rational, b: &Rational) -> Ordering {
    a.cmp(b)
}

/// Number of binary digits of `t`: the smallest `b` with `2^b > t`.
///
/// Tries `b = 1, 2, ...` in turn.
pub fn nbd(t: u64) -> Result<u32> {
    NbdCursor::new().advance(t)
}

/// Memo for repeated [`nbd`] calls with non-decreasing arguments.
///
/// The search for `nbd(t')` resumes from the last `(t, nbd(t))` pair when
/// `t' >= t`, so a run of calls costs as much as the call with the largest
/// argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NbdCursor {
    // invariant: 2^(bits-1) <= arg < 2^bits, i.e. bits = nbd(arg)
    arg: u64,
    bits: u32,
}

impl NbdCursor {
    pub fn new() -> Self {
        NbdCursor { arg: 1, bits: 1 }
    }

    pub fn advance(&mut self, t: u64) -> Result<u32> {
        if t < 1 {
            return Err(Error::Domain {
                what: "nbd requires a positive argument".into(),
            });
        }
        if t < self.arg {
            *self = NbdCursor::new();
        }
        let mut power = 1u128 << self.bits;
        while power <= u128::from(t) {
            power <<= 1;
            self.bits += 1;
        }
        self.arg = t;
        Ok(self.bits)
    }

    /// Largest argument seen so far and its digit count.
    pub fn last(&self) -> (u64, u32) {
        (self.arg, self.bits)
    }
}

impl Default for NbdCursor {
    fn default() -> Self {
        Self::new()
    }
}
