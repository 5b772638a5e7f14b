//! Counter-based random streams.
//!
//! Every replicate owns a [`RandomSource`] keyed by `(seed, stream)`. The
//! underlying generator is ChaCha8 with the stream id placed in the cipher's
//! nonce, so a replicate's draws depend only on its key and never on how the
//! replicates were scheduled across threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Normal draw with the given mean and variance. Zero variance returns the
    /// mean without consuming randomness.
    pub fn normal(&mut self, mean: f64, variance: f64) -> f64 {
        debug_assert!(variance >= 0.0);
        if variance == 0.0 {
            mean
        } else {
            mean + variance.sqrt() * self.standard_normal()
        }
    }

    /// Exact Poisson draw. A zero mean yields zero surely.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        debug_assert!(mean >= 0.0 && mean.is_finite());
        if mean <= 0.0 {
            return 0;
        }
        let dist = Poisson::new(mean).expect("finite positive Poisson mean");
        let z: f64 = dist.sample(&mut self.rng);
        z as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_sequence() {
        let mut a = RandomSource::new(7, 3);
        let mut b = RandomSource::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RandomSource::new(7, 3);
        let mut b = RandomSource::new(7, 4);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn poisson_zero_mean_is_zero() {
        let mut r = RandomSource::new(1, 1);
        for _ in 0..10 {
            assert_eq!(r.poisson(0.0), 0);
        }
    }

    #[test]
    fn poisson_large_mean_moments() {
        let mut r = RandomSource::new(11, 0);
        let reps = 200_000;
        let lambda = 100.0;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..reps {
            let z = r.poisson(lambda) as f64;
            s1 += z;
            s2 += z * z;
        }
        let mean = s1 / reps as f64;
        let var = s2 / reps as f64 - mean * mean;
        assert!((mean - lambda).abs() < 4.0 * (lambda / reps as f64).sqrt());
        assert!((var / lambda - 1.0).abs() < 0.02);
    }
}
