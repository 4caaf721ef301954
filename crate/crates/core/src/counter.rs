//! Counter-based random draws: the value at counter `c` depends only on
//! `(key, stream, c)`, never on how many draws were made before it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random-access view of one ChaCha8 stream.
#[derive(Clone, Debug)]
pub struct CounterRng {
    rng: ChaCha8Rng,
}

impl CounterRng {
    pub fn new(key: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(stream);
        Self { rng }
    }

    /// The 64-bit word at position `counter`.
    pub fn word(&mut self, counter: u64) -> u64 {
        self.rng.set_word_pos(counter as u128 * 2);
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn unit(&mut self, counter: u64) -> f64 {
        (self.word(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// One-shot `word(key, stream, counter)`.
pub fn counter_word(key: u64, stream: u64, counter: u64) -> u64 {
    CounterRng::new(key, stream).word(counter)
}
