//! Monte Carlo aggregation, the exact output-law oracle and tail reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coin::{SeededSource, PRNG_IDENTITY};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sampler::{schedule_prefix, Engine, Limits, Selector, Trace};
use crate::series::{MonotoneEnvelope, SeriesProvider};

/// Width of the acceptance bands, in standard deviations.
pub const SIGMA_BAND: f64 = 5.0;

/// Tail cells with fewer exceedances than this are not compared.
pub const MIN_EXCEEDANCES: u64 = 100;

/// Exact counts gathered from a batch of traces. Merging is associative
/// and commutative, so the split into shards does not show in the result.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    trials: u64,
    ones: u64,
    l: BTreeMap<u64, u64>,
    m: BTreeMap<u64, u64>,
    n_m: BTreeMap<u64, u64>,
}

impl Tally {
    pub fn record(&mut self, trace: &Trace) {
        self.trials += 1;
        self.ones += u64::from(trace.y);
        *self.l.entry(trace.l).or_default() += 1;
        *self.m.entry(trace.m).or_default() += 1;
        *self.n_m.entry(trace.n_m).or_default() += 1;
    }

    pub fn merge(&mut self, other: Tally) {
        self.trials += other.trials;
        self.ones += other.ones;
        for (dst, src) in [
            (&mut self.l, other.l),
            (&mut self.m, other.m),
            (&mut self.n_m, other.n_m),
        ] {
            for (k, v) in src {
                *dst.entry(k).or_default() += v;
            }
        }
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn summarize(&self, seed: u64) -> Summary {
        let n = self.trials.max(1) as f64;
        let sum = |h: &BTreeMap<u64, u64>| h.iter().map(|(k, v)| k * v).sum::<u64>();
        let mean = |h: &BTreeMap<u64, u64>| sum(h) as f64 / n;
        let max = |h: &BTreeMap<u64, u64>| h.keys().next_back().copied().unwrap_or(0);
        // counts of value > x for x = 1..=max
        let above = |h: &BTreeMap<u64, u64>| -> Vec<u64> {
            (1..=max(h))
                .map(|x| h.range(x + 1..).map(|(_, v)| v).sum())
                .collect()
        };
        Summary {
            trials: self.trials,
            seed,
            prng: PRNG_IDENTITY.to_string(),
            ones: self.ones,
            sum_l: sum(&self.l),
            sum_m: sum(&self.m),
            sum_nm: sum(&self.n_m),
            sum_l_squares: self.l.iter().map(|(k, v)| k * k * v).sum(),
            mean_y: self.ones as f64 / n,
            mean_l: mean(&self.l),
            mean_m: mean(&self.m),
            mean_nm: mean(&self.n_m),
            max_l: max(&self.l),
            max_m: max(&self.m),
            max_nm: max(&self.n_m),
            tail_l: above(&self.l),
            tail_nm: above(&self.n_m),
            m_at_least: (1..=max(&self.m))
                .map(|x| self.m.range(x..).map(|(_, v)| v).sum())
                .collect(),
            nm_support: self.n_m.keys().copied().collect(),
        }
    }
}

/// Aggregates of a Monte Carlo run. Means are decimal approximations; the
/// counts are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: u64,
    pub seed: u64,
    pub prng: String,
    /// Trials with `Y = 1`.
    pub ones: u64,
    pub sum_l: u64,
    pub sum_m: u64,
    pub sum_nm: u64,
    pub sum_l_squares: u64,
    pub mean_y: f64,
    pub mean_l: f64,
    pub mean_m: f64,
    pub mean_nm: f64,
    pub max_l: u64,
    pub max_m: u64,
    pub max_nm: u64,
    /// `tail_l[l - 1]` = trials with `L > l`, for `l = 1..=max_l`.
    pub tail_l: Vec<u64>,
    /// `tail_nm[n - 1]` = trials with `N_M > n`, for `n = 1..=max_nm`.
    pub tail_nm: Vec<u64>,
    /// `m_at_least[m - 1]` = trials with `M ≥ m`.
    pub m_at_least: Vec<u64>,
    /// Distinct values of `N_M` observed.
    pub nm_support: Vec<u64>,
}

impl Summary {
    /// Exact sample mean `sum / trials`.
    pub fn exact_mean(&self, sum: u64) -> Rational {
        Rational::new(sum, self.trials.max(1)).expect("positive denominator")
    }

    /// Standard error of `mean_l` from the sample variance.
    pub fn mean_l_std_error(&self) -> f64 {
        let n = self.trials as f64;
        if self.trials < 2 {
            return f64::INFINITY;
        }
        let var = (self.sum_l_squares as f64 - n * self.mean_l * self.mean_l) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }
}

/// Runs `trials` samples on one shared [`Engine`], trial `i` reading from
/// `SeededSource::new(master_seed, i)`. Shards split the trial range
/// across threads.
pub fn run_trials_on<P: SeriesProvider>(
    engine: &Engine<P>,
    trials: u64,
    master_seed: u64,
    shards: usize,
) -> Result<Summary> {
    if trials == 0 {
        return Err(Error::Domain {
            what: "at least one trial is required".into(),
        });
    }
    let shards = shards.clamp(1, trials.min(usize::MAX as u64) as usize) as u64;
    let chunk = trials.div_ceil(shards);
    let run_range = |lo: u64, hi: u64| -> Result<Tally> {
        let mut tally = Tally::default();
        for i in lo..hi {
            let trace = engine
                .sample(&mut SeededSource::new(master_seed, i))
                .map_err(|e| Error::Trial {
                    index: i,
                    source: Box::new(e),
                })?;
            tally.record(&trace);
        }
        Ok(tally)
    };
    let partials: Vec<Result<Tally>> = if shards == 1 {
        vec![run_range(0, trials)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..shards)
                .map(|s| {
                    let lo = (s * chunk).min(trials);
                    let hi = ((s + 1) * chunk).min(trials);
                    scope.spawn(move || run_range(lo, hi))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("shard panicked"))
                .collect()
        })
    };
    let mut total = Tally::default();
    for p in partials {
        total.merge(p?);
    }
    Ok(total.summarize(master_seed))
}

/// [`run_trials_on`] with a fresh engine.
pub fn run_trials<P: SeriesProvider>(
    provider: P,
    trials: u64,
    master_seed: u64,
    shards: usize,
    limits: Limits,
) -> Result<Summary> {
    let engine = Engine::with_limits(provider, limits);
    run_trials_on(&engine, trials, master_seed, shards)
}

/// Exact bracket on `Pr[Y = 1]` from the first `depth` iterations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassBracket {
    pub depth: u64,
    /// Probability of the paths that stop within `depth` iterations and
    /// output 1.
    pub p_one_low: Rational,
    /// Probability of the paths still running after `depth` iterations.
    pub unresolved: Rational,
    /// `(N_k, s_k)` for `k = 1..=depth`.
    pub schedule: Vec<(u64, u8)>,
}

impl MassBracket {
    pub fn p_one_high(&self) -> Rational {
        &self.p_one_low + &self.unresolved
    }

    /// `p_one_low ≤ x ≤ p_one_low + unresolved`.
    pub fn contains(&self, x: &Rational) -> bool {
        &self.p_one_low <= x && x <= &self.p_one_high()
    }
}

/// Computes the output law exactly from the deterministic schedule.
///
/// A walk stops at iteration `m` with probability `2^{-m}`; it then
/// outputs 1 for sure when `s_m = 2` and with probability 1/2 when
/// `s_m = 1`. Everything past `depth` is left unresolved.
pub fn exact_mass<P: SeriesProvider + ?Sized>(
    provider: &P,
    depth: u64,
    limits: &Limits,
) -> Result<MassBracket> {
    if depth == 0 {
        return Err(Error::Domain {
            what: "depth must be at least 1".into(),
        });
    }
    let states = schedule_prefix(provider, depth, limits)?;
    let mut low = Rational::zero();
    for s in &states {
        match s.selector {
            Selector::Upper => low += &Rational::dyadic(s.k),
            Selector::Middle => low += &Rational::dyadic(s.k + 1),
            Selector::Lower => {}
        }
    }
    let unresolved = Rational::dyadic(depth);
    if provider.negate_output() {
        low = Rational::one() - low - &unresolved;
    }
    Ok(MassBracket {
        depth,
        p_one_low: low,
        unresolved,
        schedule: states.iter().map(|s| (s.terms, s.selector as u8)).collect(),
    })
}

/// One cell of a tail comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub index: u64,
    /// Trials exceeding `index`.
    pub exceedances: u64,
    pub empirical: f64,
    pub bound: f64,
    pub bound_exact: Rational,
    /// At least [`MIN_EXCEEDANCES`] exceedances.
    pub reliable: bool,
    /// `empirical > bound`, with no allowance for sampling noise.
    pub above_bound: bool,
    /// Reliable and above `bound + 5σ`.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub trials: u64,
    /// `Pr[L > l]` against `2^{-l+1}`.
    pub inputs: Vec<TailRow>,
    /// `Pr[N_M > n]` against `4 ε(n)`.
    pub terms: Vec<TailRow>,
    pub flagged: bool,
}

fn tail_row(index: u64, exceedances: u64, trials: u64, bound_exact: Rational) -> TailRow {
    let empirical = exceedances as f64 / trials as f64;
    let bound = bound_exact.to_f64_approx();
    let p = bound.min(1.0);
    let slack = SIGMA_BAND * (p * (1.0 - p) / trials as f64).sqrt();
    let reliable = exceedances >= MIN_EXCEEDANCES;
    TailRow {
        index,
        exceedances,
        empirical,
        bound,
        above_bound: empirical > bound,
        flagged: reliable && empirical > bound + slack,
        reliable,
        bound_exact,
    }
}

/// Compares the empirical tails of `L` and `N_M` with their theoretical
/// bounds, for `l = 1..=max_l` and `n = 1..=max_nm`.
pub fn tail_report<P: SeriesProvider + ?Sized>(
    summary: &Summary,
    provider: &P,
) -> Result<TailReport> {
    if summary.trials == 0 {
        return Err(Error::Domain {
            what: "empty summary".into(),
        });
    }
    let enveloped = MonotoneEnvelope::new(provider);
    let inputs = (1..=summary.max_l.max(1))
        .map(|l| {
            let count = summary.tail_l.get(l as usize - 1).copied().unwrap_or(0);
            tail_row(l, count, summary.trials, Rational::dyadic(l - 1))
        })
        .collect::<Vec<_>>();
    let four = Rational::from(4u64);
    let terms = (1..=summary.max_nm.max(1))
        .map(|n| {
            let count = summary.tail_nm.get(n as usize - 1).copied().unwrap_or(0);
            Ok(tail_row(n, count, summary.trials, &four * &enveloped.error_bound(n)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let flagged = inputs.iter().chain(&terms).any(|r| r.flagged);
    Ok(TailReport {
        trials: summary.trials,
        inputs,
        terms,
        flagged,
    })
}

/// `Pr[M ≥ m]` against the shifted-geometric law `2^{-m+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricRow {
    pub m: u64,
    pub empirical: f64,
    pub expected: f64,
    /// `|empirical - expected| ≤ 5σ`.
    pub within_band: bool,
}

pub fn geometric_law(summary: &Summary, max_m: u64) -> Vec<GeometricRow> {
    let n = summary.trials as f64;
    (1..=max_m)
        .map(|m| {
            let count = summary.m_at_least.get(m as usize - 1).copied().unwrap_or(0);
            let empirical = count as f64 / n;
            let expected = 0.5f64.powi(m as i32 - 1);
            let sigma = (expected * (1.0 - expected) / n).sqrt();
            GeometricRow {
                m,
                empirical,
                expected,
                within_band: (empirical - expected).abs() <= SIGMA_BAND * sigma,
            }
        })
        .collect()
}
