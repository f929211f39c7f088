//! Component-based random number generation.
//!
//! A [`SeedSequence`] pools entropy and expands it into seed words; a
//! [`BitGenerator`] ([`Pcg64`], [`Mt19937`]) turns seed words into a raw
//! stream; a [`Generator`] consumes a bit generator and produces variates.
//!
//! Raw bit-generator output is stable across releases. Variate streams from
//! [`Generator`] are not.

mod generator;
mod mt19937;
mod pcg64;
mod seed;
pub mod ziggurat;

pub use generator::{Distribution, Generator};
pub use mt19937::Mt19937;
pub use pcg64::Pcg64;
pub use seed::{mix64, SeedSequence};

/// A deterministic source of raw uniform words.
pub trait BitGenerator {
    fn next_u64(&mut self) -> u64;

    fn next_u32(&mut self) -> u32 {
        self.next_u64() as u32
    }

    /// Top 53 bits of the next word scaled into `[0, 1)`.
    fn next_double(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl<B: BitGenerator + ?Sized> BitGenerator for Box<B> {
    fn next_u64(&mut self) -> u64 {
        (**self).next_u64()
    }

    fn next_u32(&mut self) -> u32 {
        (**self).next_u32()
    }

    fn next_double(&mut self) -> f64 {
        (**self).next_double()
    }
}

/// Replays a fixed list of words, cycling when it runs out.
#[derive(Debug, Clone)]
pub struct ReplayBitGen {
    words: Vec<u64>,
    pos: usize,
    drawn: u64,
}

impl ReplayBitGen {
    pub fn new(words: Vec<u64>) -> ReplayBitGen {
        assert!(!words.is_empty(), "replay generator needs at least one word");
        ReplayBitGen { words, pos: 0, drawn: 0 }
    }

    /// Number of words handed out so far.
    pub fn drawn(&self) -> u64 {
        self.drawn
    }
}

impl BitGenerator for ReplayBitGen {
    fn next_u64(&mut self) -> u64 {
        let w = self.words[self.pos];
        self.pos = (self.pos + 1) % self.words.len();
        self.drawn += 1;
        w
    }
}
