//! Seed expansion. Every random stream is ChaCha8 keyed by the 64-bit run
//! seed, with the 64-bit stream id selecting an independent keystream; work
//! item `i` of a Monte Carlo loop uses stream id `i`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(id);
    r
}
