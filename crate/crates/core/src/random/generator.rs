use crate::array::{ArrayHandle, Shape};
use crate::error::{ArrayError, Result};

use super::ziggurat::{exponential_table, normal_table, ZigguratTable, LAYERS};
use super::{BitGenerator, Pcg64, SeedSequence};

const TWO_POW_M52: f64 = 1.0 / (1u64 << 52) as f64;

/// Turns raw bits from an owned bit generator into variates.
pub struct Generator {
    bitgen: Box<dyn BitGenerator + Send>,
    normal: &'static ZigguratTable,
    exponential: &'static ZigguratTable,
}

/// Distributions [`Generator::sample_array`] can fill an array from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Uniform,
    Normal,
    Exponential,
    Integers { low: i64, high: i64 },
}

impl Generator {
    pub fn new(bitgen: impl BitGenerator + Send + 'static) -> Generator {
        Generator {
            bitgen: Box::new(bitgen),
            normal: normal_table(),
            exponential: exponential_table(),
        }
    }

    /// PCG64 seeded from `seq`.
    pub fn from_seed_sequence(seq: &SeedSequence) -> Generator {
        Generator::new(Pcg64::from_seed_sequence(seq))
    }

    pub fn bit_generator(&mut self) -> &mut (dyn BitGenerator + Send) {
        &mut *self.bitgen
    }

    /// Uniform on the 53-bit grid in `[0, 1)`.
    pub fn random_double(&mut self) -> f64 {
        self.bitgen.next_double()
    }

    /// Uniform integer in `[low, high)` by multiply-high rejection.
    pub fn integers(&mut self, low: i64, high: i64) -> Result<i64> {
        if low >= high {
            return Err(ArrayError::argument(format!("low ({low}) must be less than high ({high})")));
        }
        let range = high.wrapping_sub(low) as u64;
        Ok(low.wrapping_add(self.bounded_u64(range) as i64))
    }

    /// Uniform in `[0, range)`; `range` must be positive.
    pub fn bounded_u64(&mut self, range: u64) -> u64 {
        debug_assert!(range > 0);
        let mut m = self.bitgen.next_u64() as u128 * range as u128;
        let mut low = m as u64;
        if low < range {
            let threshold = range.wrapping_neg() % range;
            while low < threshold {
                m = self.bitgen.next_u64() as u128 * range as u128;
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    pub fn standard_normal(&mut self) -> f64 {
        let t = self.normal;
        loop {
            let bits = self.bitgen.next_u64();
            let layer = (bits & (LAYERS as u64 - 1)) as usize;
            let negative = bits & 0x80 != 0;
            let u = (bits >> 12) as f64 * TWO_POW_M52;
            let x = u * t.x[layer];
            let sign = |v: f64| if negative { -v } else { v };
            if x < t.x[layer + 1] {
                return sign(x);
            }
            if layer == 0 {
                // Tail beyond r, by the pair-of-exponentials method.
                loop {
                    let a = -(1.0 - self.random_double()).ln() / t.r;
                    let b = -(1.0 - self.random_double()).ln();
                    if b + b > a * a {
                        return sign(t.r + a);
                    }
                }
            }
            if t.f[layer] + self.random_double() * (t.f[layer + 1] - t.f[layer]) < t.density.pdf(x) {
                return sign(x);
            }
        }
    }

    pub fn standard_exponential(&mut self) -> f64 {
        let t = self.exponential;
        loop {
            let bits = self.bitgen.next_u64();
            let layer = (bits & (LAYERS as u64 - 1)) as usize;
            let u = (bits >> 12) as f64 * TWO_POW_M52;
            let x = u * t.x[layer];
            if x < t.x[layer + 1] {
                return x;
            }
            if layer == 0 {
                return t.r - (1.0 - self.random_double()).ln();
            }
            if t.f[layer] + self.random_double() * (t.f[layer + 1] - t.f[layer]) < t.density.pdf(x) {
                return x;
            }
        }
    }

    /// C-order array of independent draws.
    pub fn sample_array(&mut self, dist: Distribution, shape: impl Into<Shape>) -> Result<ArrayHandle> {
        let shape = shape.into();
        let n = shape
            .checked_element_count()
            .ok_or_else(|| ArrayError::Alloc(format!("array of shape {shape}")))?;
        match dist {
            Distribution::Integers { low, high } => {
                let values = (0..n).map(|_| self.integers(low, high)).collect::<Result<Vec<_>>>()?;
                ArrayHandle::from_i64(values, shape)
            }
            Distribution::Uniform => ArrayHandle::from_f64((0..n).map(|_| self.random_double()).collect(), shape),
            Distribution::Normal => ArrayHandle::from_f64((0..n).map(|_| self.standard_normal()).collect(), shape),
            Distribution::Exponential => {
                ArrayHandle::from_f64((0..n).map(|_| self.standard_exponential()).collect(), shape)
            }
        }
    }
}

impl std::fmt::Debug for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Generator").finish_non_exhaustive()
    }
}
