//! Seeded, portable pseudo-random source.
//!
//! All randomness in this crate comes from PCG-XSL-RR-128/64 (`Pcg64`, a
//! 128-bit LCG with a 64-bit output permutation). A seed `s` initializes the
//! generator as `Pcg64::new(s as u128 ^ SEED_SALT, DEFAULT_STREAM)`, and a
//! uniform variate in `[0, 1)` is `(next_u64() >> 11) * 2^-53`. Both steps are
//! fixed here so that streams are bit-identical across platforms and crate
//! upgrades that keep the `Pcg64` algorithm.

use rand_pcg::rand_core::Rng;
use rand_pcg::Pcg64;

const SEED_SALT: u128 = 0x853c_49e6_748f_ea9b_0d2b_1a7b_6b1d_f2a5;
const DEFAULT_STREAM: u128 = 0x0a02_bdbf_7bb3_c0a7_ac28_fa16_a64a_bf96;

#[derive(Debug, Clone)]
pub struct SeededRng(Pcg64);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self(Pcg64::new(seed as u128 ^ SEED_SALT, DEFAULT_STREAM))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Index drawn from `pmf` by inverse CDF on one uniform variate. Never
    /// returns a zero-probability index.
    pub fn categorical(&mut self, pmf: &[f64]) -> usize {
        let u = self.uniform();
        let mut cumulative = 0.0;
        let mut last_positive = 0;
        for (i, &w) in pmf.iter().enumerate() {
            if w > 0.0 {
                cumulative += w;
                last_positive = i;
                if u < cumulative {
                    return i;
                }
            }
        }
        last_positive
    }
}
