use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,

    #[error("division by zero")]
    DivisionByZero,

    #[error("domain error: {what}")]
    Domain { what: String },

    #[error("cannot parse {input:?} as a rational")]
    Parse { input: String },

    #[error("bit source exhausted after {consumed} bits")]
    SourceExhausted { consumed: u64 },

    /// The sampler ran out of input bits before terminating. Carries the
    /// `(N_k, s_k)` pairs of the iterations that were visited.
    #[error("input exhausted after {consumed} bits ({} iterations visited)", schedule.len())]
    InputExhausted {
        consumed: u64,
        schedule: Vec<(u64, u8)>,
    },

    #[error("series contract violated at index {index}: {reason}")]
    ContractViolation { index: u64, reason: String },

    #[error("provider diverged in iteration {iteration}: more than {max_terms} series terms needed")]
    Divergence { iteration: u64, max_terms: u64 },

    #[error("iteration cap of {cap} exceeded")]
    IterationCap { cap: u64 },

    #[error("deadline exceeded in iteration {iteration} after {terms} series terms")]
    DeadlineExceeded { iteration: u64, terms: u64 },

    #[error("unknown constant {name:?} (expected gamma, pi4, ln2 or rational:n/d)")]
    UnknownConstant { name: String },

    #[error("trial {index}: {source}")]
    Trial {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}
