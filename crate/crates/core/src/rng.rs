//! Deterministic random numbers for simulation runs.
//!
//! Xoshiro256++ (256-bit state). Replica streams are derived from a base
//! seed with SplitMix64 so each replica is reproducible on its own.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::{Domain, Point};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimRng(Xoshiro256PlusPlus);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replica `index` under `base_seed`.
pub fn derive_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base_seed) ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        SimRng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn for_replica(base_seed: u64, index: u64) -> Self {
        SimRng::new(derive_seed(base_seed, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `(0, 1]`.
    #[inline]
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential waiting time with the given rate.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -libm::log(self.uniform_open0()) / rate
    }

    /// Uniform integer in `0..n` (Lemire's multiply-shift with rejection).
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        let n = n as u64;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            let low = m as u64;
            if low >= n.wrapping_neg() % n {
                return (m >> 64) as usize;
            }
        }
    }

    /// Uniform position in the box.
    pub fn position(&mut self, domain: &Domain) -> Point {
        let u = [self.uniform(), if domain.dim() == 2 { self.uniform() } else { 0.0 }];
        // u * L can round up to L when u is within an ulp of 1
        domain.wrap(domain.scale_unit(u))
    }

    /// Poisson variate, counted as arrivals of a unit-rate process on
    /// `[0, mean]`.
    pub fn poisson(&mut self, mean: f64) -> usize {
        let mut n = 0;
        let mut t = self.exponential(1.0);
        while t <= mean {
            n += 1;
            t += self.exponential(1.0);
        }
        n
    }
}
