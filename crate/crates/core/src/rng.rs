//! Reproducible random streams.
//!
//! A stream is a ChaCha8 generator keyed by the master seed (expanded
//! with `seed_from_u64`) and positioned on ChaCha stream number
//! `replicate_index`. Streams are counter based: replicate `i` always
//! sees the same bits no matter which worker draws it, or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RandomStream = ChaCha8Rng;

pub fn seed_stream(master_seed: u64, replicate_index: u64) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate_index);
    rng
}
