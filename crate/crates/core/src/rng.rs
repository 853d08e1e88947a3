//! Reproducible random streams.
//!
//! Every stream is a ChaCha20 generator (counter-based) keyed by a 64-bit
//! master seed; replicas select disjoint streams by index, so a replica's
//! draws depend only on `(master_seed, replica)` and never on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha20Rng,
}

impl StreamRng {
    pub fn new(seed: u64) -> Self {
        Self::for_replica(seed, 0)
    }

    /// Stream number `replica` under `seed`.
    pub fn for_replica(seed: u64, replica: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(replica);
        Self { inner }
    }

    /// Uniform draw on `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Unit-rate exponential draw by inversion, `-ln(1 - U)`; strictly positive.
    pub fn exp1(&mut self) -> f64 {
        loop {
            let e = -(1.0 - self.uniform()).ln();
            if e > 0.0 {
                return e;
            }
        }
    }

    /// Exponential draw with the given rate.
    pub fn exp(&mut self, rate: f64) -> f64 {
        self.exp1() / rate
    }

    /// Poisson draw by counting unit-rate arrivals (fine for small means).
    pub fn poisson(&mut self, mean: f64) -> u64 {
        let mut acc = 0.0;
        let mut k = 0;
        loop {
            acc += self.exp1();
            if acc > mean {
                return k;
            }
            k += 1;
        }
    }

    /// Geometric draw on {0, 1, ...} with success probability `p`.
    pub fn geometric(&mut self, p: f64) -> u64 {
        let mut k = 0;
        while self.uniform() >= p {
            k += 1;
        }
        k
    }

    /// Derives an independent child seed, used to fan one stream out to replicas.
    pub fn next_seed(&mut self) -> u64 {
        self.inner.random::<u64>()
    }
}
