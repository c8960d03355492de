//! Seeded generators. Every random draw in the crate comes from a ChaCha8
//! stream keyed by `(seed, stream)`, so work split across threads replays
//! identically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
