use serde::{Deserialize, Serialize};

const POOL_INIT: u64 = 0x5555_5555_5555_5555;
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// 64-bit avalanche finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z ^= z >> 33;
    z = z.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    z ^= z >> 33;
    z = z.wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    z ^= z >> 33;
    z
}

/// Pools entropy words into a digest and expands it into seed words for
/// bit generators. Children spawned from a sequence extend its spawn key, so
/// every worker in a tree gets its own deterministic stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSequence {
    entropy: Vec<u64>,
    spawn_key: Vec<u32>,
    pool: u64,
    children_spawned: u32,
}

impl SeedSequence {
    /// `None` entropy reads four words from the operating system.
    pub fn new(entropy: Option<Vec<u64>>, spawn_key: Vec<u32>) -> SeedSequence {
        let entropy = entropy.unwrap_or_else(system_entropy);
        let words = entropy.iter().copied().chain(spawn_key.iter().map(|&k| k as u64));
        let pool = words.enumerate().fold(POOL_INIT, |p, (i, w)| {
            mix64(p ^ w.wrapping_add(GOLDEN.wrapping_mul(i as u64 + 1)))
        });
        SeedSequence {
            entropy,
            spawn_key,
            pool,
            children_spawned: 0,
        }
    }

    pub fn from_seed(seed: u64) -> SeedSequence {
        SeedSequence::new(Some(vec![seed]), Vec::new())
    }

    pub fn from_os() -> SeedSequence {
        SeedSequence::new(None, Vec::new())
    }

    pub fn entropy(&self) -> &[u64] {
        &self.entropy
    }

    pub fn spawn_key(&self) -> &[u32] {
        &self.spawn_key
    }

    pub fn pool(&self) -> u64 {
        self.pool
    }

    pub fn children_spawned(&self) -> u32 {
        self.children_spawned
    }

    /// `n` seed words; word `j` depends only on the pool and `j`.
    pub fn generate_state(&self, n: usize) -> Vec<u64> {
        (0..n as u64)
            .map(|j| mix64(self.pool.wrapping_add(GOLDEN.wrapping_mul(j + 1))))
            .collect()
    }

    /// `n` children with spawn keys `parent_key ++ [i]`, continuing from the
    /// indices handed out by earlier calls.
    pub fn spawn(&mut self, n: usize) -> Vec<SeedSequence> {
        let first = self.children_spawned;
        let children = (0..n as u32)
            .map(|i| {
                let mut key = self.spawn_key.clone();
                key.push(first + i);
                SeedSequence::new(Some(self.entropy.clone()), key)
            })
            .collect();
        self.children_spawned += n as u32;
        children
    }
}

fn system_entropy() -> Vec<u64> {
    let mut bytes = [0u8; 32];
    getrandom::fill(&mut bytes).expect("operating system entropy source unavailable");
    bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect()
}
