//! Seed handling. Every random quantity in the crate is drawn from a
//! `ChaCha8Rng` built from an explicit 64-bit seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based seed split: the seed for stream `index` depends only on
/// `(master, index)`, never on execution order.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Named sub-stream of a trial seed, so that dither, channel and noise draws
/// stay independent of each other.
pub fn substream(seed: u64, tag: u64) -> u64 {
    derive_seed(seed ^ 0x5bd1_e995, tag)
}
