//! Deterministic 64-bit generator used for source random walks and solver
//! multistarts.
//!
//! Pinned to splitmix64 so traces can be reproduced outside this crate:
//! state advances by 0x9E3779B97F4A7C15 per draw, and each output is
//! finalized with multiply-xorshift rounds using 0xBF58476D1CE4E5B9 and
//! 0x94D049BB133111EB (shifts 30, 27, 31). Floats take the top 53 bits.

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, 1) with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in [0, n). n must be nonzero.
    pub fn next_below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}
