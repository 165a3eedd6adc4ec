//! SplitMix64: a tiny, platform-independent generator for weight init and
//! synthetic fixtures.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform_f64(&mut self, lo: f64, hi: f64) -> f64 {
        let v = lo + (hi - lo) * self.next_f64();
        // lo + (hi - lo) * u can round up to hi.
        if v >= hi {
            lo.max(next_down_f64(hi))
        } else {
            v
        }
    }

    /// `n` values uniform in [lo, hi).
    pub fn uniform(&mut self, n: usize, lo: f32, hi: f32) -> Result<Vec<f32>> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidRange {
                lo: lo as f64,
                hi: hi as f64,
            });
        }
        Ok((0..n)
            .map(|_| {
                let v = (lo as f64 + (hi as f64 - lo as f64) * self.next_f64()) as f32;
                if v >= hi {
                    lo.max(next_down_f32(hi))
                } else {
                    v
                }
            })
            .collect())
    }

    /// Log-uniform in [lo, hi); both bounds positive.
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !(0.0 < lo && lo < hi) {
            return Err(Error::InvalidRange { lo, hi });
        }
        let v = self.uniform_f64(lo.ln(), hi.ln()).exp();
        Ok(v.clamp(lo, next_down_f64(hi)))
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_f64() * n as f64) as usize % n.max(1)
    }

    /// Child generator with an independent stream.
    pub fn fork(&mut self) -> Rng {
        Rng::new(self.next_u64())
    }
}

fn next_down_f64(x: f64) -> f64 {
    if x > 0.0 {
        f64::from_bits(x.to_bits() - 1)
    } else if x == 0.0 {
        -f64::from_bits(1)
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}

fn next_down_f32(x: f32) -> f32 {
    if x > 0.0 {
        f32::from_bits(x.to_bits() - 1)
    } else if x == 0.0 {
        -f32::from_bits(1)
    } else {
        f32::from_bits(x.to_bits() + 1)
    }
}
