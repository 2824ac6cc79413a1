//! Counter-based random streams.
//!
//! Every draw is addressed by `(seed, stream, position)` on a ChaCha8
//! keystream, so the value of a draw does not depend on the order in which
//! draws are requested. Realizations use the round as the stream and the
//! agent/slot as the position; Monte Carlo harnesses derive child seeds the
//! same way.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Keyed generator that can jump to any `(stream, position)` in O(1).
#[derive(Clone, Debug)]
pub struct CounterRng {
    rng: ChaCha8Rng,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Positions the generator at the `index`-th 64-bit word of `stream`.
    pub fn seek(&mut self, stream: u64, index: u64) {
        self.rng.set_stream(stream);
        self.rng.set_word_pos(2 * u128::from(index));
    }

    /// Next uniform in `[0, 1)` from the current position.
    pub fn next_unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` at an absolute address.
    pub fn unit_at(&mut self, stream: u64, index: u64) -> f64 {
        self.seek(stream, index);
        self.next_unit()
    }
}

/// Derives an independent child seed from `(master, stream, index)`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut rng = CounterRng::new(master);
    rng.seek(stream, index);
    rng.next_u64()
}

/// Plain sequential generator seeded from a derived seed, for instance generation.
pub fn instance_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
