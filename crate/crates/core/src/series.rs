//! The series contract a target constant must satisfy, plus adapters.
//!
//! A provider represents `θ = Σ_{j≥1} a_j` with positive rational terms and
//! a rational bound `ε(N)` with `θ - Σ_{j≤N} a_j ≤ ε(N)`, `ε(0) = 1` and
//! `ε(N) → 0`. Nothing here checks the bound against `θ`; an invalid bound
//! makes the sampler produce the wrong law without any visible error.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A positive rational series with a truncation error bound.
///
/// `term` and `error_bound` must be pure functions of their argument.
/// Implementations that memoize do so behind interior locking.
pub trait SeriesProvider: Send + Sync {
    /// The term `a_j`, `j ≥ 1`.
    fn term(&self, j: u64) -> Result<Rational>;

    /// The bound `ε(N)`, with `ε(0) = 1`.
    fn error_bound(&self, n: u64) -> Result<Rational>;

    /// Whether the sampler should output `1 - Y` instead of `Y`.
    fn negate_output(&self) -> bool {
        false
    }
}

impl<P: SeriesProvider + ?Sized> SeriesProvider for &P {
    fn term(&self, j: u64) -> Result<Rational> {
        (**self).term(j)
    }
    fn error_bound(&self, n: u64) -> Result<Rational> {
        (**self).error_bound(n)
    }
    fn negate_output(&self) -> bool {
        (**self).negate_output()
    }
}

impl<P: SeriesProvider + ?Sized> SeriesProvider for Box<P> {
    fn term(&self, j: u64) -> Result<Rational> {
        (**self).term(j)
    }
    fn error_bound(&self, n: u64) -> Result<Rational> {
        (**self).error_bound(n)
    }
    fn negate_output(&self) -> bool {
        (**self).negate_output()
    }
}

impl<P: SeriesProvider + ?Sized> SeriesProvider for Arc<P> {
    fn term(&self, j: u64) -> Result<Rational> {
        (**self).term(j)
    }
    fn error_bound(&self, n: u64) -> Result<Rational> {
        (**self).error_bound(n)
    }
    fn negate_output(&self) -> bool {
        (**self).negate_output()
    }
}

/// `Σ_{j≤n} a_j`.
pub fn partial_sum<P: SeriesProvider + ?Sized>(provider: &P, n: u64) -> Result<Rational> {
    let mut sum = Rational::zero();
    for j in 1..=n {
        sum += &provider.term(j)?;
    }
    Ok(sum)
}

/// Replaces `ε(n)` by its running minimum `min{ε(1), ..., ε(n)}`.
///
/// The minima are cached and extended one index at a time, so each inner
/// bound is evaluated once.
#[derive(Debug)]
pub struct MonotoneEnvelope<P> {
    inner: P,
    // minima[i] = min ε(1..=i+1)
    minima: Mutex<Vec<Rational>>,
}

impl<P: SeriesProvider> MonotoneEnvelope<P> {
    pub fn new(inner: P) -> Self {
        MonotoneEnvelope {
            inner,
            minima: Mutex::new(Vec::new()),
        }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn into_inner(self) -> P {
        self.inner
    }
}

impl<P: SeriesProvider + Clone> Clone for MonotoneEnvelope<P> {
    fn clone(&self) -> Self {
        MonotoneEnvelope {
            inner: self.inner.clone(),
            minima: Mutex::new(self.minima.lock().unwrap().clone()),
        }
    }
}

impl<P: SeriesProvider> SeriesProvider for MonotoneEnvelope<P> {
    fn term(&self, j: u64) -> Result<Rational> {
        self.inner.term(j)
    }

    fn error_bound(&self, n: u64) -> Result<Rational> {
        if n == 0 {
            return Ok(Rational::one());
        }
        let mut minima = self.minima.lock().unwrap();
        while (minima.len() as u64) < n {
            let next = self.inner.error_bound(minima.len() as u64 + 1)?;
            let value = match minima.last() {
                Some(prev) => prev.clone().min(next),
                None => next,
            };
            minima.push(value);
        }
        Ok(minima[(n - 1) as usize].clone())
    }

    fn negate_output(&self) -> bool {
        self.inner.negate_output()
    }
}

/// Regroups an alternating series `Σ (-1)^{j+1} b_j` with `b_j` decreasing
/// to zero into positive terms `a_j = b_{2j-1} - b_{2j}`, with the Leibniz
/// bound `ε(N) = b_{2N+1}`.
///
/// Monotonicity of `b` is checked lazily, pair by pair, as terms are
/// requested.
pub struct Alternating<F> {
    b: F,
}

impl<F> Alternating<F>
where
    F: Fn(u64) -> Rational + Send + Sync,
{
    pub fn new(b: F) -> Self {
        Alternating { b }
    }
}

impl<F: Clone> Clone for Alternating<F> {
    fn clone(&self) -> Self {
        Alternating { b: self.b.clone() }
    }
}

impl<F> std::fmt::Debug for Alternating<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Alternating").finish_non_exhaustive()
    }
}

impl<F> SeriesProvider for Alternating<F>
where
    F: Fn(u64) -> Rational + Send + Sync,
{
    fn term(&self, j: u64) -> Result<Rational> {
        if j == 0 {
            return Err(Error::Domain {
                what: "series terms are indexed from 1".into(),
            });
        }
        let odd = (self.b)(2 * j - 1);
        let even = (self.b)(2 * j);
        if even.is_zero() || even.is_positive() {
            let a = odd - even;
            if a.is_positive() {
                return Ok(a);
            }
            return Err(Error::ContractViolation {
                index: j,
                reason: format!("a_{j} = b_{} - b_{} = {a} is not positive", 2 * j - 1, 2 * j),
            });
        }
        Err(Error::ContractViolation {
            index: j,
            reason: format!("b_{} = {even} is negative", 2 * j),
        })
    }

    fn error_bound(&self, n: u64) -> Result<Rational> {
        if n == 0 {
            return Ok(Rational::one());
        }
        let bound = (self.b)(2 * n + 1);
        if bound.is_zero() || bound.is_positive() {
            Ok(bound)
        } else {
            Err(Error::ContractViolation {
                index: n,
                reason: format!("b_{} = {bound} is negative", 2 * n + 1),
            })
        }
    }
}

/// The degenerate one-term series for a rational `θ = n/d`:
/// `a_1 = θ`, `ε(N) = 0` for `N ≥ 1`.
///
/// Terms beyond the first are reported as zero; the sampler never asks
/// for them since the bound is already exact after one term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSeries {
    value: Rational,
}

impl RationalSeries {
    pub fn new(value: Rational) -> Result<Self> {
        if !value.is_positive() || value >= Rational::one() {
            return Err(Error::Domain {
                what: format!("rational target {value} is outside (0, 1)"),
            });
        }
        Ok(RationalSeries { value })
    }

    pub fn from_parts(n: u64, d: u64) -> Result<Self> {
        RationalSeries::new(Rational::new(n, d)?)
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }
}

impl SeriesProvider for RationalSeries {
    fn term(&self, j: u64) -> Result<Rational> {
        match j {
            0 => Err(Error::Domain {
                what: "series terms are indexed from 1".into(),
            }),
            1 => Ok(self.value.clone()),
            _ => Ok(Rational::zero()),
        }
    }

    fn error_bound(&self, n: u64) -> Result<Rational> {
        Ok(if n == 0 {
            Rational::one()
        } else {
            Rational::zero()
        })
    }
}

/// Marks a provider for `1 - θ` so that the sampler flips its output,
/// yielding a `θ`-coin.
#[derive(Debug, Clone)]
pub struct Complemented<P> {
    inner: P,
}

impl<P: SeriesProvider> Complemented<P> {
    pub fn new(inner: P) -> Self {
        Complemented { inner }
    }

    pub fn into_inner(self) -> P {
        self.inner
    }
}

impl<P: SeriesProvider> SeriesProvider for Complemented<P> {
    fn term(&self, j: u64) -> Result<Rational> {
        self.inner.term(j)
    }

    fn error_bound(&self, n: u64) -> Result<Rational> {
        self.inner.error_bound(n)
    }

    fn negate_output(&self) -> bool {
        !self.inner.negate_output()
    }
}

/// Counts calls into the wrapped provider.
#[derive(Debug, Default)]
pub struct Counting<P> {
    inner: P,
    terms: AtomicU64,
    bounds: AtomicU64,
}

impl<P: SeriesProvider> Counting<P> {
    pub fn new(inner: P) -> Self {
        Counting {
            inner,
            terms: AtomicU64::new(0),
            bounds: AtomicU64::new(0),
        }
    }

    pub fn term_calls(&self) -> u64 {
        self.terms.load(Ordering::Relaxed)
    }

    pub fn bound_calls(&self) -> u64 {
        self.bounds.load(Ordering::Relaxed)
    }
}

impl<P: SeriesProvider> SeriesProvider for Counting<P> {
    fn term(&self, j: u64) -> Result<Rational> {
        self.terms.fetch_add(1, Ordering::Relaxed);
        self.inner.term(j)
    }

    fn error_bound(&self, n: u64) -> Result<Rational> {
        self.bounds.fetch_add(1, Ordering::Relaxed);
        self.inner.error_bound(n)
    }

    fn negate_output(&self) -> bool {
        self.inner.negate_output()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    /// Fixed bounds for `N = 1..`, zero terms.
    struct Bounds(Vec<Rational>);

    impl SeriesProvider for Bounds {
        fn term(&self, _: u64) -> Result<Rational> {
            Ok(Rational::zero())
        }
        fn error_bound(&self, n: u64) -> Result<Rational> {
            Ok(if n == 0 {
                Rational::one()
            } else {
                self.0[(n - 1) as usize].clone()
            })
        }
    }

    fn enveloped(bounds: Vec<Rational>) -> Vec<Rational> {
        let n = bounds.len() as u64;
        let env = MonotoneEnvelope::new(Bounds(bounds));
        (1..=n).map(|i| env.error_bound(i).unwrap()).collect()
    }

    #[test]
    fn envelope_takes_running_minimum() {
        assert_eq!(
            enveloped(vec![r(1, 2), r(1, 4), r(1, 3), r(1, 8)]),
            vec![r(1, 2), r(1, 4), r(1, 4), r(1, 8)]
        );
        let mono = vec![r(1, 2), r(1, 3), r(1, 5), r(1, 7)];
        assert_eq!(enveloped(mono.clone()), mono);
        let env = MonotoneEnvelope::new(Bounds(vec![r(1, 3)]));
        assert_eq!(env.error_bound(0).unwrap(), Rational::one());
    }

    #[test]
    fn envelope_evaluates_each_bound_once() {
        let env = MonotoneEnvelope::new(Counting::new(Bounds(vec![r(1, 2); 10])));
        for n in (0..=10).rev() {
            env.error_bound(n).unwrap();
        }
        env.error_bound(7).unwrap();
        assert_eq!(env.inner().bound_calls(), 10);
    }

    #[test]
    fn alternating_harmonic() {
        let ln2 = Alternating::new(|j| Rational::new(1, j).unwrap());
        assert_eq!(ln2.term(1).unwrap(), r(1, 2));
        assert_eq!(ln2.term(2).unwrap(), r(1, 12));
        assert_eq!(ln2.error_bound(1).unwrap(), r(1, 3));
        assert_eq!(ln2.error_bound(0).unwrap(), Rational::one());
    }

    #[test]
    fn alternating_geometric() {
        let geo = Alternating::new(|j| r(1, 2).pow(j as i64).unwrap());
        assert_eq!(geo.term(1).unwrap(), r(1, 4));
        assert_eq!(geo.error_bound(1).unwrap(), r(1, 8));
    }

    #[test]
    fn alternating_rejects_increasing_pair() {
        let bad = Alternating::new(|j| if j == 2 { r(1, 1) } else { r(1, 2 * j as i64) });
        assert!(matches!(
            bad.term(1),
            Err(Error::ContractViolation { index: 1, .. })
        ));
        let negative = Alternating::new(|j| r(1, 1) - r(j as i64, 2));
        assert!(negative.term(2).is_err());
        assert!(negative.error_bound(2).is_err());
    }

    #[test]
    fn alternating_partial_sums_match_grouped_series() {
        let b = |j: u64| Rational::new(1, j).unwrap();
        let adapter = Alternating::new(b);
        let mut alternating = Rational::zero();
        for n in 1..=40u64 {
            alternating += &b(2 * n - 1);
            alternating = alternating - b(2 * n);
            assert_eq!(partial_sum(&adapter, n).unwrap(), alternating);
        }
    }

    #[test]
    fn rational_series() {
        let third = RationalSeries::from_parts(1, 3).unwrap();
        assert_eq!(third.term(1).unwrap(), r(1, 3));
        assert_eq!(third.error_bound(1).unwrap(), Rational::zero());
        assert_eq!(third.error_bound(0).unwrap(), Rational::one());
        assert!(RationalSeries::from_parts(1, 2).is_ok());
        assert!(matches!(
            RationalSeries::from_parts(2, 1),
            Err(Error::Domain { .. })
        ));
        assert!(RationalSeries::from_parts(0, 5).is_err());
        assert!(RationalSeries::from_parts(3, 3).is_err());
        assert!(RationalSeries::from_parts(1, 0).is_err());
    }

    #[test]
    fn complement_flag() {
        let third = RationalSeries::from_parts(1, 3).unwrap();
        assert!(!third.negate_output());
        let c = Complemented::new(third.clone());
        assert!(c.negate_output());
        assert_eq!(c.term(1).unwrap(), r(1, 3));
        assert!(!Complemented::new(c.clone()).negate_output());
        assert!(MonotoneEnvelope::new(c).negate_output());
    }
}
