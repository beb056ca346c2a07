//! Exact Bernoulli(θ) sampling from fair coin flips using only rational
//! arithmetic.
//!
//! `θ` is described by a [`SeriesProvider`]: positive rational terms
//! `a_j` with `Σ a_j = θ`, and a rational bound `ε(N)` on the truncation
//! error that goes to zero. The sampler refines a dyadic interval around
//! `θ` one halving per input bit and never needs `θ` itself. On average it
//! reads between 2 and 3 bits per output.
//!
//! ```
//! use buffon::{sample, Gamma, Limits, ReplaySource};
//!
//! let trace = sample(&Gamma::new(), &mut ReplaySource::parse("110")?, &Limits::default())?;
//! assert_eq!((trace.y, trace.m, trace.l, trace.n_m), (0, 3, 3, 4));
//! # Ok::<(), buffon::Error>(())
//! ```

pub mod coin;
pub mod constants;
pub mod error;
pub mod rational;
pub mod sampler;
pub mod series;
pub mod stats;

pub use coin::{BitSource, ReplaySource, SeededSource, PRNG_IDENTITY};
pub use constants::{ln2, Constant, Gamma, PiQuarter};
pub use error::{Error, Result};
pub use rational::{compare, nbd, NbdCursor, Rational};
pub use sampler::{
    advance_iteration, sample, sample_rational, schedule_prefix, Engine, Limits, SamplerState,
    Selector, Trace,
};
pub use series::{
    partial_sum, Alternating, Complemented, Counting, MonotoneEnvelope, RationalSeries,
    SeriesProvider,
};
pub use stats::{
    exact_mass, geometric_law, run_trials, run_trials_on, tail_report, GeometricRow, MassBracket,
    Summary, Tally, TailReport, TailRow,
};
