use super::{BitGenerator, SeedSequence};

const N: usize = 624;
const M: usize = 397;
const MATRIX_A: u32 = 0x9908_B0DF;
const UPPER: u32 = 0x8000_0000;
const LOWER: u32 = 0x7FFF_FFFF;

/// 32-bit Mersenne Twister.
#[derive(Clone)]
pub struct Mt19937 {
    key: [u32; N],
    position: usize,
}

impl Mt19937 {
    /// Classic initializer from a single 32-bit seed.
    pub fn from_u32_seed(seed: u32) -> Mt19937 {
        let mut key = [0u32; N];
        key[0] = seed;
        for i in 1..N {
            let prev = key[i - 1];
            key[i] = 1_812_433_253u32
                .wrapping_mul(prev ^ (prev >> 30))
                .wrapping_add(i as u32);
        }
        Mt19937 { key, position: N }
    }

    /// Fills the key from 312 seed words, each split low half then high half.
    pub fn from_seed_sequence(seq: &SeedSequence) -> Mt19937 {
        Self::from_words(&seq.generate_state(N / 2))
    }

    fn from_words(words: &[u64]) -> Mt19937 {
        let mut key = [0u32; N];
        for (j, &w) in words.iter().enumerate() {
            key[2 * j] = w as u32;
            key[2 * j + 1] = (w >> 32) as u32;
        }
        if key.iter().all(|&k| k == 0) {
            key[0] = UPPER;
        }
        Mt19937 { key, position: N }
    }

    pub fn key(&self) -> &[u32; N] {
        &self.key
    }

    pub fn position(&self) -> usize {
        self.position
    }

    fn twist(&mut self) {
        for i in 0..N {
            let y = (self.key[i] & UPPER) | (self.key[(i + 1) % N] & LOWER);
            let mag = if y & 1 == 1 { MATRIX_A } else { 0 };
            self.key[i] = self.key[(i + M) % N] ^ (y >> 1) ^ mag;
        }
        self.position = 0;
    }
}

impl BitGenerator for Mt19937 {
    fn next_u32(&mut self) -> u32 {
        if self.position >= N {
            self.twist();
        }
        let mut y = self.key[self.position];
        self.position += 1;
        y ^= y >> 11;
        y ^= (y << 7) & 0x9D2C_5680;
        y ^= (y << 15) & 0xEFC6_0000;
        y ^= y >> 18;
        y
    }

    /// Two outputs, first in the high half.
    fn next_u64(&mut self) -> u64 {
        let hi = self.next_u32() as u64;
        let lo = self.next_u32() as u64;
        hi << 32 | lo
    }
}

impl std::fmt::Debug for Mt19937 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mt19937").field("position", &self.position).finish_non_exhaustive()
    }
}
