//! Seedable random source shared by every stochastic operation.
//!
//! Generation algorithm (fixed for reproducibility):
//!
//! * bit stream: ChaCha8 keyed through `SeedableRng::seed_from_u64`
//!   (the `rand_chacha` value-stability guarantee covers this);
//! * uniform in `[0, 1)`: top 53 bits of one `u64`, times 2^-53;
//! * Gaussian: Box–Muller, cosine branch only, consuming exactly two `u64`
//!   words per variate. The sine branch is discarded so that the number of
//!   words drawn never depends on call history.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            stream: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform variate in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.stream.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    /// Standard normal variate.
    pub fn standard_normal(&mut self) -> f64 {
        // 1 - U lies in (0, 1], so the log is finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Gaussian variate with the given mean and standard deviation.
    ///
    /// `stddev == 0` still consumes two words so draw counts stay fixed.
    pub fn normal(&mut self, mean: f64, stddev: f64) -> f64 {
        mean + stddev * self.standard_normal()
    }

    /// Derives an independent child seed, e.g. one per concurrent run.
    pub fn derive_seed(seed: u64, index: u64) -> u64 {
        // splitmix64 finalizer over the combined value
        let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}
