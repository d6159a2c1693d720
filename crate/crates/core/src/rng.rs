//! Deterministic random streams.
//!
//! Every random quantity in the toolkit is drawn from [`SplitMix64`], seeded
//! from one user-facing 64-bit seed. The generator is the SplitMix64 sequence
//! of Steele, Lea and Flood (2014):
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! return z ^ (z >> 31)
//! ```
//!
//! Uniform doubles take the top 53 bits: `(z >> 11) * 2^-53`. Normal deviates
//! use the basic Box-Muller transform on two consecutive uniforms, discarding
//! the sine branch. This is enough to reproduce any stream in another language.

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent stream derived from `seed` and a label, e.g. a wavevector.
    pub fn keyed(seed: u64, key: &[i64]) -> Self {
        let mut h = SplitMix64::new(seed);
        let mut acc = h.next_u64();
        for &k in key {
            let mut s = SplitMix64::new(acc ^ (k as u64).wrapping_mul(0xD6E8FEB86659FD93));
            acc = s.next_u64();
        }
        SplitMix64::new(acc)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_below(&mut self, bound: usize) -> usize {
        (self.next_f64() * bound as f64) as usize % bound.max(1)
    }

    pub fn next_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
