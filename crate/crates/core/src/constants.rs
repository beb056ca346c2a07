//! Built-in series for Euler's constant γ, π/4 and ln 2, and lookup by name.

use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::rational::{NbdCursor, Rational};
use crate::series::{Alternating, RationalSeries, SeriesProvider};

/// Euler's constant from the binary-digit series
/// `γ = 1/2 + Σ_{j≥1} nbd(j) / (2j(2j+1)(2j+2))`, reindexed so that
/// `a_1 = 1/2` and `a_j = nbd(j-1) / (2j(2j-1)(2j-2))` for `j ≥ 2`.
///
/// The error bound for `N ≥ 2` is the running minimum of
/// `(2 + nbd(N-1) + 1/(N-1)) / (16 (N-1)^2)`, starting from `ε(1) = 1/2`.
/// The raw expression is not monotone: it goes up right after every
/// power of two from 16 on.
#[derive(Debug, Default)]
pub struct Gamma {
    memo: Mutex<GammaMemo>,
}

#[derive(Debug, Clone, Default)]
struct GammaMemo {
    nbd: NbdCursor,
    // minima[i] = ε(i + 1)
    minima: Vec<Rational>,
}

impl GammaMemo {
    fn nbd(&mut self, t: u64) -> u32 {
        self.nbd.advance(t).expect("argument is positive")
    }
}

impl Clone for Gamma {
    fn clone(&self) -> Self {
        Gamma {
            memo: Mutex::new(self.memo.lock().unwrap().clone()),
        }
    }
}

impl Gamma {
    pub fn new() -> Self {
        Gamma::default()
    }

    /// The non-monotone bound `(2 + nbd(N-1) + 1/(N-1)) / (16 (N-1)^2)`,
    /// defined for `N ≥ 2`.
    pub fn raw_error_bound(&self, n: u64) -> Result<Rational> {
        if n < 2 {
            return Err(Error::Domain {
                what: format!("raw gamma bound needs N >= 2, got {n}"),
            });
        }
        let bits = self.memo.lock().unwrap().nbd(n - 1);
        Ok(raw_bound(n, bits))
    }

    /// Largest `nbd` argument evaluated so far and its value.
    pub fn nbd_memo(&self) -> (u64, u32) {
        self.memo.lock().unwrap().nbd.last()
    }
}

fn raw_bound(n: u64, bits: u32) -> Rational {
    let m = n - 1;
    let numerator = Rational::from(2 + u64::from(bits)) + Rational::new(1, m).expect("m >= 1");
    let denominator = Rational::from_integer(16u128 * u128::from(m) * u128::from(m));
    numerator
        .checked_div(&denominator)
        .expect("denominator is positive")
}

impl SeriesProvider for Gamma {
    fn term(&self, j: u64) -> Result<Rational> {
        match j {
            0 => Err(Error::Domain {
                what: "series terms are indexed from 1".into(),
            }),
            1 => Ok(Rational::new(1, 2)?),
            _ => {
                let bits = self.memo.lock().unwrap().nbd(j - 1);
                let j = u128::from(j);
                let den = 2 * j * (2 * j - 1) * (2 * j - 2);
                Rational::new(bits, den)
            }
        }
    }

    fn error_bound(&self, n: u64) -> Result<Rational> {
        if n == 0 {
            return Ok(Rational::one());
        }
        let mut memo = self.memo.lock().unwrap();
        while (memo.minima.len() as u64) < n {
            let next_n = memo.minima.len() as u64 + 1;
            let value = match memo.minima.last().cloned() {
                None => Rational::new(1, 2)?,
                Some(prev) => {
                    let bits = memo.nbd(next_n - 1);
                    prev.min(raw_bound(next_n, bits))
                }
            };
            memo.minima.push(value);
        }
        Ok(memo.minima[(n - 1) as usize].clone())
    }
}

/// `π/4 = arctan(1/2) + arctan(1/3)`, with both arctangent series grouped
/// in pairs of consecutive terms:
///
/// `a_j = (2^{-4j+3} + 3^{-4j+3})/(4j-3) - (2^{-4j+1} + 3^{-4j+1})/(4j-1)`,
/// `ε(N) = (2^{-4N-1} + 3^{-4N-1})/(4N+1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PiQuarter;

impl PiQuarter {
    pub fn new() -> Self {
        PiQuarter
    }
}

/// `(2^e + 3^e) / q`.
fn machin_pair(e: i64, q: u64) -> Result<Rational> {
    let two = Rational::from(2u64).pow(e)?;
    let three = Rational::from(3u64).pow(e)?;
    (two + three).checked_div(&Rational::from(q))
}

impl SeriesProvider for PiQuarter {
    fn term(&self, j: u64) -> Result<Rational> {
        if j == 0 {
            return Err(Error::Domain {
                what: "series terms are indexed from 1".into(),
            });
        }
        let j = i64::try_from(j).map_err(|_| Error::Domain {
            what: "term index too large".into(),
        })?;
        let first = machin_pair(-4 * j + 3, (4 * j - 3) as u64)?;
        let second = machin_pair(-4 * j + 1, (4 * j - 1) as u64)?;
        Ok(first - second)
    }

    fn error_bound(&self, n: u64) -> Result<Rational> {
        if n == 0 {
            return Ok(Rational::one());
        }
        let n = i64::try_from(n).map_err(|_| Error::Domain {
            what: "bound index too large".into(),
        })?;
        machin_pair(-4 * n - 1, (4 * n + 1) as u64)
    }
}

fn reciprocal(j: u64) -> Rational {
    Rational::new(1, j).expect("index is positive")
}

/// ln 2 from the alternating harmonic series `1 - 1/2 + 1/3 - ...`.
pub fn ln2() -> Alternating<fn(u64) -> Rational> {
    Alternating::new(reciprocal as fn(u64) -> Rational)
}

/// A constant selectable by name: `gamma`, `pi4`, `ln2` or `rational:n/d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constant {
    Gamma,
    PiQuarter,
    Ln2,
    Rational(Rational),
}

impl Constant {
    pub fn provider(&self) -> Box<dyn SeriesProvider> {
        match self {
            Constant::Gamma => Box::new(Gamma::new()),
            Constant::PiQuarter => Box::new(PiQuarter),
            Constant::Ln2 => Box::new(ln2()),
            Constant::Rational(v) => {
                Box::new(RationalSeries::new(v.clone()).expect("validated on parse"))
            }
        }
    }
}

impl FromStr for Constant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(Constant::Gamma),
            "pi4" => Ok(Constant::PiQuarter),
            "ln2" => Ok(Constant::Ln2),
            _ => {
                let Some(frac) = s.strip_prefix("rational:") else {
                    return Err(Error::UnknownConstant { name: s.into() });
                };
                let value: Rational = frac.parse()?;
                RationalSeries::new(value.clone())?;
                Ok(Constant::Rational(value))
            }
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Gamma => f.write_str("gamma"),
            Constant::PiQuarter => f.write_str("pi4"),
            Constant::Ln2 => f.write_str("ln2"),
            Constant::Rational(v) => write!(f, "rational:{v}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn gamma_terms() {
        let g = Gamma::new();
        assert_eq!(g.term(1).unwrap(), r(1, 2));
        // nbd(1) / (4*3*2)
        assert_eq!(g.term(2).unwrap(), r(1, 24));
        // nbd(2) / (6*5*4)
        assert_eq!(g.term(3).unwrap(), r(1, 60));
        assert!(g.term(0).is_err());
    }

    #[test]
    fn gamma_bounds() {
        let g = Gamma::new();
        assert_eq!(g.error_bound(0).unwrap(), Rational::one());
        assert_eq!(g.error_bound(1).unwrap(), r(1, 2));
        // (2 + 1 + 1) / 16
        assert_eq!(g.error_bound(2).unwrap(), r(1, 4));
        // (2 + 2 + 1/3) / 144
        assert_eq!(g.error_bound(4).unwrap(), r(13, 432));
        assert_eq!(g.raw_error_bound(4).unwrap(), r(13, 432));
    }

    #[test]
    fn gamma_raw_bound_rises_after_powers_of_two() {
        let g = Gamma::new();
        for t in 4..=6 {
            let n = 1u64 << t;
            assert!(g.raw_error_bound(n + 1).unwrap() > g.raw_error_bound(n).unwrap());
            assert_eq!(g.error_bound(n + 1).unwrap(), g.error_bound(n).unwrap());
        }
        // below 16 the raw bound still decreases at every step
        for n in 2..16 {
            assert!(g.raw_error_bound(n + 1).unwrap() < g.raw_error_bound(n).unwrap());
        }
        for n in 0..300 {
            assert!(g.error_bound(n + 1).unwrap() <= g.error_bound(n).unwrap());
        }
    }

    #[test]
    fn gamma_memo_is_order_independent() {
        let fresh = |n| Gamma::new().error_bound(n).unwrap();
        let g = Gamma::new();
        g.error_bound(100).unwrap();
        assert_eq!(g.nbd_memo(), (99, 7));
        for n in [3, 17, 64, 65, 100, 130] {
            assert_eq!(g.error_bound(n).unwrap(), fresh(n));
            assert_eq!(g.term(n).unwrap(), Gamma::new().term(n).unwrap());
        }
    }

    #[test]
    fn pi_quarter_terms() {
        let p = PiQuarter;
        assert_eq!(p.term(1).unwrap(), r(505, 648));
        let a2 = p.term(2).unwrap();
        assert!(a2.is_positive() && a2 <= r(55, 7776));
        for j in 1..=100 {
            assert!(p.term(j).unwrap().is_positive(), "a_{j}");
        }
    }

    #[test]
    fn pi_quarter_bounds() {
        let p = PiQuarter;
        assert_eq!(p.error_bound(0).unwrap(), Rational::one());
        assert_eq!(p.error_bound(1).unwrap(), r(55, 7776));
        let expected = (r(1, 512) + r(1, 19683)).checked_div(&r(9, 1)).unwrap();
        assert_eq!(p.error_bound(2).unwrap(), expected);
        for n in 1..=100 {
            let ratio = p
                .error_bound(n + 1)
                .unwrap()
                .checked_div(&p.error_bound(n).unwrap())
                .unwrap();
            assert!(ratio < r(1, 16), "N = {n}");
        }
    }

    #[test]
    fn names_round_trip() {
        for name in ["gamma", "pi4", "ln2", "rational:1/3", "rational:3/4"] {
            let c: Constant = name.parse().unwrap();
            assert_eq!(c.to_string(), name);
        }
        assert_eq!(
            "rational:2/6".parse::<Constant>().unwrap().to_string(),
            "rational:1/3"
        );
        assert!(matches!(
            "nope".parse::<Constant>(),
            Err(Error::UnknownConstant { .. })
        ));
        assert!("rational:2/1".parse::<Constant>().is_err());
        assert!("rational:abc".parse::<Constant>().is_err());
    }

    #[test]
    fn ln2_provider() {
        let p = ln2();
        assert_eq!(p.term(1).unwrap(), r(1, 2));
        assert_eq!(p.error_bound(3).unwrap(), r(1, 7));
    }
}
