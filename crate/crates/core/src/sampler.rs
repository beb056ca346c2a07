//! Exact Bernoulli sampling by interval refinement.
//!
//! Iteration `k` halves the quantized interval `(ℓ_{k-1}, ℓ_{k-1} + 2^{-(k-1)}]`
//! known to contain `θ`, keeping its lower, middle or upper half
//! (`s_k = 0, 1, 2`). Series terms are added until the current bracket
//! `(ℓ̂, ℓ̂ + ε]`, clipped to the previous interval, fits in one of the
//! three halves. One fair bit then decides whether a uniform variable
//! lies in the chosen half; the first 0 stops the walk and the last `s_k`
//! gives the output. The sequence of `(N_k, s_k)` never depends on the
//! bits, which is what [`Engine`] exploits to cache it across samples.

use std::sync::RwLock;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coin::BitSource;
use crate::error::{Error, Result};
use crate::rational::{nbd, Rational};
use crate::series::{MonotoneEnvelope, SeriesProvider};

pub const DEFAULT_MAX_TERMS: u64 = 1_000_000;
pub const DEFAULT_MAX_ITERATIONS: u64 = 4096;

/// Safety caps. Hitting one means the provider's bound is broken (or the
/// caller asked for more work than it allowed), never bad luck.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest `N` any iteration may reach.
    pub max_terms: u64,
    pub max_iterations: u64,
    /// Abort schedule construction past this instant.
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_terms: DEFAULT_MAX_TERMS,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            deadline: None,
        }
    }
}

/// Which half of the previous quantized interval was kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Selector {
    Lower = 0,
    Middle = 1,
    Upper = 2,
}

impl From<Selector> for u8 {
    fn from(s: Selector) -> u8 {
        s as u8
    }
}

impl TryFrom<u8> for Selector {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Selector::Lower),
            1 => Ok(Selector::Middle),
            2 => Ok(Selector::Upper),
            _ => Err(Error::Domain {
                what: format!("selector {v} not in {{0, 1, 2}}"),
            }),
        }
    }
}

/// Variables of the refinement after iteration `k` has completed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplerState {
    /// Iteration index.
    pub k: u64,
    /// Series terms consumed, `N_k`.
    pub terms: u64,
    /// `ℓ̂_k = Σ_{j≤N_k} a_j`.
    pub partial_sum: Rational,
    /// `ε(N_k)`.
    pub error_bound: Rational,
    /// Lower end `ℓ_k` of the quantized interval `(ℓ_k, ℓ_k + 2^{-k}]`,
    /// a multiple of `2^{-(k+1)}`.
    pub lower: Rational,
    pub selector: Selector,
}

impl SamplerState {
    pub fn initial() -> Self {
        SamplerState {
            k: 0,
            terms: 0,
            partial_sum: Rational::zero(),
            error_bound: Rational::one(),
            lower: Rational::zero(),
            selector: Selector::Lower,
        }
    }

    /// The quantized interval `(ℓ_k, ℓ_k + 2^{-k}]` as `(lower, upper)`.
    pub fn interval(&self) -> (Rational, Rational) {
        (self.lower.clone(), &self.lower + &Rational::dyadic(self.k))
    }
}

/// Runs iteration `state.k + 1`: adds terms until the bracket fits one of
/// the three halves and records which. Consumes no randomness.
///
/// `provider` must already have a non-increasing bound; [`sample`] and
/// [`Engine`] take care of that.
pub fn advance_iteration<P: SeriesProvider + ?Sized>(
    state: &SamplerState,
    provider: &P,
    limits: &Limits,
) -> Result<SamplerState> {
    let k = state.k + 1;
    let base = state.lower.clone();
    let half = Rational::dyadic(k);
    let quarter = Rational::dyadic(k + 1);
    let mid = &base + &half;
    let low_quarter = &base + &quarter;
    let high_quarter = &mid + &quarter;

    let mut terms = state.terms;
    let mut partial_sum = state.partial_sum.clone();
    let mut error_bound = state.error_bound.clone();

    let selector = loop {
        let upper = &partial_sum + &error_bound;
        if upper <= mid {
            break Selector::Lower;
        } else if partial_sum > mid {
            break Selector::Upper;
        } else if partial_sum > low_quarter && upper <= high_quarter {
            break Selector::Middle;
        }
        if terms >= limits.max_terms {
            return Err(Error::Divergence {
                iteration: k,
                max_terms: limits.max_terms,
            });
        }
        if let Some(deadline) = limits.deadline {
            if Instant::now() > deadline {
                return Err(Error::DeadlineExceeded {
                    iteration: k,
                    terms,
                });
            }
        }
        terms += 1;
        partial_sum += &provider.term(terms)?;
        error_bound = provider.error_bound(terms)?;
    };

    let lower = match selector {
        Selector::Lower => base,
        Selector::Middle => base + quarter,
        Selector::Upper => base + half,
    };
    Ok(SamplerState {
        k,
        terms,
        partial_sum,
        error_bound,
        lower,
        selector,
    })
}

/// Telemetry of one sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    /// Output bit, after any complement flip.
    pub y: u8,
    /// Iterations, `M`.
    pub m: u64,
    /// Input bits consumed, `L`.
    pub l: u64,
    /// Series terms in use at termination, `N_M`.
    pub n_m: u64,
    /// `(N_k, s_k)` for `k = 1..=M`.
    pub schedule: Vec<(u64, u8)>,
}

/// Walks the schedule given by `step(k)` (which returns `(N_k, s_k)`),
/// drawing one bit per iteration.
fn run<S, F>(source: &mut S, negate: bool, limits: &Limits, mut step: F) -> Result<Trace>
where
    S: BitSource + ?Sized,
    F: FnMut(u64) -> Result<(u64, Selector)>,
{
    let mut schedule = Vec::new();
    let start = source.consumed();
    let exhausted = |schedule: &Vec<(u64, u8)>, source: &S| Error::InputExhausted {
        consumed: source.consumed() - start,
        schedule: schedule.clone(),
    };
    let (terms, selector) = loop {
        let k = schedule.len() as u64 + 1;
        if k > limits.max_iterations {
            return Err(Error::IterationCap {
                cap: limits.max_iterations,
            });
        }
        let (terms, selector) = step(k)?;
        schedule.push((terms, selector as u8));
        match source.next_bit() {
            Ok(0) => break (terms, selector),
            Ok(_) => {}
            Err(Error::SourceExhausted { .. }) => return Err(exhausted(&schedule, source)),
            Err(e) => return Err(e),
        }
    };
    let y = match selector {
        Selector::Lower => 0,
        Selector::Upper => 1,
        Selector::Middle => match source.next_bit() {
            Ok(bit) => bit,
            Err(Error::SourceExhausted { .. }) => return Err(exhausted(&schedule, source)),
            Err(e) => return Err(e),
        },
    };
    let m = schedule.len() as u64;
    Ok(Trace {
        y: if negate { 1 - y } else { y },
        m,
        l: m + u64::from(selector == Selector::Middle),
        n_m: terms,
        schedule,
    })
}

/// Draws one sample without caching anything between calls.
pub fn sample<P, S>(provider: &P, source: &mut S, limits: &Limits) -> Result<Trace>
where
    P: SeriesProvider + ?Sized,
    S: BitSource + ?Sized,
{
    let provider = MonotoneEnvelope::new(provider);
    let mut state = SamplerState::initial();
    run(source, provider.negate_output(), limits, |_| {
        state = advance_iteration(&state, &provider, limits)?;
        Ok((state.terms, state.selector))
    })
}

/// The first `depth` states of the schedule.
pub fn schedule_prefix<P: SeriesProvider + ?Sized>(
    provider: &P,
    depth: u64,
    limits: &Limits,
) -> Result<Vec<SamplerState>> {
    let provider = MonotoneEnvelope::new(provider);
    let mut states = Vec::with_capacity(depth as usize);
    let mut state = SamplerState::initial();
    for _ in 0..depth {
        state = advance_iteration(&state, &provider, limits)?;
        states.push(state.clone());
    }
    Ok(states)
}

/// Exact sampler for rational `θ = n/d` without a series: read
/// `b = nbd(d)` bits as an integer `t`, retry until `t < d`, output
/// `t < n`.
///
/// The trace reports rounds as `m`, no series terms and an empty schedule.
pub fn sample_rational<S: BitSource + ?Sized>(n: u64, d: u64, source: &mut S) -> Result<Trace> {
    if n == 0 || n >= d {
        return Err(Error::Domain {
            what: format!("{n}/{d} is outside (0, 1)"),
        });
    }
    let width = nbd(d)?;
    let mut rounds = 0u64;
    let t = loop {
        rounds += 1;
        let mut t = 0u128;
        for _ in 0..width {
            t = (t << 1) | u128::from(source.next_bit()?);
        }
        if t < u128::from(d) {
            break t;
        }
    };
    Ok(Trace {
        y: u8::from(t < u128::from(n)),
        m: rounds,
        l: u64::from(width) * rounds,
        n_m: 0,
        schedule: Vec::new(),
    })
}

/// A sampler that keeps the per-iteration states across samples, so each
/// iteration index is computed once no matter how many samples reach it.
///
/// The cache sits behind a read-write lock: samples that stay within the
/// cached prefix only take the read side, and any number of threads may
/// share one engine.
pub struct Engine<P> {
    provider: MonotoneEnvelope<P>,
    limits: Limits,
    // states[i] is the state after iteration i + 1
    states: RwLock<Vec<SamplerState>>,
}

impl<P: SeriesProvider> Engine<P> {
    pub fn new(provider: P) -> Self {
        Engine::with_limits(provider, Limits::default())
    }

    pub fn with_limits(provider: P, limits: Limits) -> Self {
        Engine {
            provider: MonotoneEnvelope::new(provider),
            limits,
            states: RwLock::new(Vec::new()),
        }
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    /// The provider, wrapped in its monotone envelope.
    pub fn provider(&self) -> &MonotoneEnvelope<P> {
        &self.provider
    }

    /// Iterations computed so far.
    pub fn depth(&self) -> u64 {
        self.states.read().unwrap().len() as u64
    }

    /// The state after iteration `k ≥ 1`, computing missing iterations.
    pub fn state(&self, k: u64) -> Result<SamplerState> {
        self.ensure(k)?;
        Ok(self.states.read().unwrap()[(k - 1) as usize].clone())
    }

    /// All states computed so far.
    pub fn states(&self) -> Vec<SamplerState> {
        self.states.read().unwrap().clone()
    }

    fn step(&self, k: u64) -> Result<(u64, Selector)> {
        {
            let states = self.states.read().unwrap();
            if let Some(s) = states.get((k - 1) as usize) {
                return Ok((s.terms, s.selector));
            }
        }
        self.ensure(k)?;
        let states = self.states.read().unwrap();
        let s = &states[(k - 1) as usize];
        Ok((s.terms, s.selector))
    }

    fn ensure(&self, k: u64) -> Result<()> {
        if k == 0 {
            return Err(Error::Domain {
                what: "iterations are indexed from 1".into(),
            });
        }
        if self.states.read().unwrap().len() as u64 >= k {
            return Ok(());
        }
        let mut states = self.states.write().unwrap();
        while (states.len() as u64) < k {
            let next = match states.last() {
                Some(prev) => advance_iteration(prev, &self.provider, &self.limits)?,
                None => advance_iteration(&SamplerState::initial(), &self.provider, &self.limits)?,
            };
            states.push(next);
        }
        Ok(())
    }

    pub fn sample<S: BitSource + ?Sized>(&self, source: &mut S) -> Result<Trace> {
        run(source, self.provider.negate_output(), &self.limits, |k| {
            self.step(k)
        })
    }
}
