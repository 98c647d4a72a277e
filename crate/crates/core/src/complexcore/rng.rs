//! Seeded randomness.
//!
//! Every stochastic routine takes a `&mut Rng`. Parallel callers never share
//! one: they derive children with [`Rng::child`], whose seed is a hash of the
//! parent seed and the task index, so results do not depend on scheduling.

use rand::seq::index;
use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use super::linalg::{CVec, C64};

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of a sequence of words. Independent of platform and
/// compiler version, unlike `std::hash`.
pub fn hash64(parts: &[u64]) -> u64 {
    let mut h = 0x9e37_79b9_7f4a_7c15u64;
    for &p in parts {
        h = mix(h ^ mix(p.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha12Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha12Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream for task `index`. Does not advance `self`.
    pub fn child(&self, index: u64) -> Rng {
        Rng::new(hash64(&[self.seed, index]))
    }

    /// One CN(0,1) draw: real and imaginary parts independent N(0, 1/2).
    pub fn complex_gaussian(&mut self) -> C64 {
        let re: f64 = self.inner.sample(StandardNormal);
        let im: f64 = self.inner.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// `e^{iφ}` with φ uniform on `[0, 2π)`.
    pub fn unit_phase(&mut self) -> C64 {
        let phi = self.inner.random::<f64>() * std::f64::consts::TAU;
        C64::from_polar(1.0, phi)
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniformly random `size`-subset of `0..len`, sorted ascending.
    pub fn subset(&mut self, len: usize, size: usize) -> Vec<usize> {
        let mut s = index::sample(&mut self.inner, len, size).into_vec();
        s.sort_unstable();
        s
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

/// `length` i.i.d. CN(0,1) entries.
pub fn sample_complex_gaussian(rng: &mut Rng, length: usize) -> CVec {
    assert!(length >= 1, "length must be positive");
    CVec::from_raw((0..length).map(|_| rng.complex_gaussian()).collect())
}
