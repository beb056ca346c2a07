//! Fair-bit input streams.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Name and version of the generator behind [`SeededSource`], recorded in
/// reports.
pub const PRNG_IDENTITY: &str = "ChaCha20 (rand_chacha 0.9, seed_from_u64 + set_stream)";

/// A stream of independent fair bits.
pub trait BitSource {
    /// Next bit, 0 or 1.
    fn next_bit(&mut self) -> Result<u8>;

    /// Number of bits handed out so far.
    fn consumed(&self) -> u64;
}

impl<S: BitSource + ?Sized> BitSource for &mut S {
    fn next_bit(&mut self) -> Result<u8> {
        (**self).next_bit()
    }

    fn consumed(&self) -> u64 {
        (**self).consumed()
    }
}

/// Replays a fixed bit sequence, then reports exhaustion.
#[derive(Debug, Clone)]
pub struct ReplaySource {
    bits: Vec<u8>,
    pos: usize,
}

impl ReplaySource {
    pub fn new(bits: impl Into<Vec<u8>>) -> Result<Self> {
        let bits = bits.into();
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Domain {
                what: format!("replay bit {b} is not 0 or 1"),
            });
        }
        Ok(ReplaySource { bits, pos: 0 })
    }

    /// Parses a string over `{0,1}` such as `"1101"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Domain {
                    what: format!("bit string {s:?} contains {c:?}"),
                }),
            })
            .collect::<Result<Vec<u8>>>()?;
        ReplaySource::new(bits)
    }
}

impl BitSource for ReplaySource {
    fn next_bit(&mut self) -> Result<u8> {
        let bit = *self.bits.get(self.pos).ok_or(Error::SourceExhausted {
            consumed: self.pos as u64,
        })?;
        self.pos += 1;
        Ok(bit)
    }

    fn consumed(&self) -> u64 {
        self.pos as u64
    }
}

/// Pseudo-random fair bits from ChaCha20.
///
/// `(master_seed, stream_index)` selects the key and the ChaCha stream id,
/// so each trial of a Monte Carlo run can own an independent stream no
/// matter which worker executes it.
#[derive(Debug, Clone)]
pub struct SeededSource {
    rng: ChaCha20Rng,
    word: u64,
    left: u32,
    consumed: u64,
}

impl SeededSource {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        SeededSource {
            rng,
            word: 0,
            left: 0,
            consumed: 0,
        }
    }
}

impl BitSource for SeededSource {
    fn next_bit(&mut self) -> Result<u8> {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let bit = (self.word & 1) as u8;
        self.word >>= 1;
        self.left -= 1;
        self.consumed += 1;
        Ok(bit)
    }

    fn consumed(&self) -> u64 {
        self.consumed
    }
}
