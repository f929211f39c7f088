use super::{BitGenerator, SeedSequence};

/// 128-bit LCG with the XSL-RR 64-bit output permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pcg64 {
    state: u128,
    increment: u128,
}

impl Pcg64 {
    pub const MULTIPLIER: u128 = 0x2360_ED05_1FC6_5DA4_4385_DF64_9FCC_F645;

    /// Seeds from four words of `seq`: words 0,1 give the state (high, low),
    /// words 2,3 the stream selector.
    pub fn from_seed_sequence(seq: &SeedSequence) -> Pcg64 {
        let w = seq.generate_state(4);
        let state = (w[0] as u128) << 64 | w[1] as u128;
        let inc = (w[2] as u128) << 64 | w[3] as u128;
        Pcg64::from_state(state, inc)
    }

    /// Raw state; `increment` is forced odd as `(increment << 1) | 1`.
    pub fn from_state(state: u128, increment: u128) -> Pcg64 {
        Pcg64 {
            state,
            increment: (increment << 1) | 1,
        }
    }

    pub fn state(&self) -> u128 {
        self.state
    }

    pub fn increment(&self) -> u128 {
        self.increment
    }
}

impl BitGenerator for Pcg64 {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(self.increment);
        let hi = (self.state >> 64) as u64;
        let lo = self.state as u64;
        (hi ^ lo).rotate_right((hi >> 58) as u32)
    }
}
