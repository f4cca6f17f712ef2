//! Counter-based stream derivation.
//!
//! Every random draw in an experiment comes from a ChaCha8 stream addressed by
//! `(seed, trial, block)`: the seed is the key, the trial index selects the
//! ChaCha stream, and the block index selects a disjoint 2^40-word window of
//! that stream. Results therefore do not depend on which thread runs what.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const BLOCK_WORDS_LOG2: u32 = 40;

/// Rows per block. A block draws at most a few words per coordinate, far
/// below the 2^40-word window it owns.
pub const BLOCK_ROWS: usize = 2048;

pub fn stream(seed: u64, trial: u64, block: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.set_word_pos(u128::from(block) << BLOCK_WORDS_LOG2);
    rng
}
