#![allow(dead_code)]

use buffon::Rational;
use num_bigint::BigInt;

// 50 digits, truncated (not rounded).
pub const GAMMA_50: &str = "0.57721566490153286060651209008240243104215933593992";
pub const PI_QUARTER_50: &str = "0.78539816339744830961566084581987572104929234984377";
pub const LN2_50: &str = "0.69314718055994530941723212145817656807550013436025";

/// A truncated decimal expansion `0.d1d2...dn` as the interval
/// `[x, x + 10^-n]` known to contain the constant.
#[derive(Debug, Clone)]
pub struct Reference {
    pub lo: Rational,
    pub hi: Rational,
}

impl Reference {
    pub fn parse(decimal: &str) -> Self {
        let digits = decimal.strip_prefix("0.").expect("value in (0, 1)");
        let scale = BigInt::from(10u32).pow(digits.len() as u32);
        let n: BigInt = digits.parse().unwrap();
        let lo = Rational::new(n.clone(), scale.clone()).unwrap();
        let hi = Rational::new(n + 1, scale).unwrap();
        Reference { lo, hi }
    }

    pub fn gamma() -> Self {
        Self::parse(GAMMA_50)
    }

    pub fn pi_quarter() -> Self {
        Self::parse(PI_QUARTER_50)
    }

    pub fn ln2() -> Self {
        Self::parse(LN2_50)
    }

    /// Every point of the reference interval lies in `(a, b]`.
    pub fn inside_open_closed(&self, a: &Rational, b: &Rational) -> bool {
        a < &self.lo && &self.hi <= b
    }

    /// Every point of the reference interval lies in `[a, b]`.
    pub fn inside_closed(&self, a: &Rational, b: &Rational) -> bool {
        a <= &self.lo && &self.hi <= b
    }
}
