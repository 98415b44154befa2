//! Counter-based random streams.
//!
//! Every run owns a ChaCha8 stream selected by `(master_seed, run_index)`, so
//! runs can be scheduled on any number of threads without changing a single
//! draw. Within a run, draws live at fixed counter positions: the
//! initialisation draws first, then a fixed block of slots per epoch.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Words of the ChaCha keystream consumed by one `u64` draw.
const WORDS_PER_DRAW: u128 = 2;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::for_run(seed, 0)
    }

    /// Independent stream for run `run_index` under `master_seed`.
    pub fn for_run(master_seed: u64, run_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(run_index);
        RngStream {
            seed: master_seed,
            stream: run_index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Index of the next sequential draw.
    pub fn position(&self) -> u64 {
        (self.rng.get_word_pos() / WORDS_PER_DRAW) as u64
    }

    /// Moves the counter so the next draw is draw number `index`.
    pub fn seek(&mut self, index: u64) {
        self.rng.set_word_pos(index as u128 * WORDS_PER_DRAW);
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }

    /// Uniform integer in `[0, n)` from a single draw.
    pub fn next_below(&mut self, n: u64) -> u64 {
        below(self.next_u64(), n)
    }
}

pub(crate) fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Multiply-shift reduction of one draw to `[0, n)`.
pub(crate) fn below(bits: u64, n: u64) -> u64 {
    ((bits as u128 * n as u128) >> 64) as u64
}

/// Picks index `floor(u * count)` where `u` is the 53-bit fraction of `bits`,
/// using integer arithmetic so that nested choices stay consistent:
/// `pick(bits, a * b) / b == pick(bits, a)`.
pub(crate) fn pick(bits: u64, count: usize) -> usize {
    (((bits >> 11) as u128 * count as u128) >> 53) as usize
}
