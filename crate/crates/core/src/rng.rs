//! Counter-based RNG streams derived from a master seed.
//!
//! Every independent work item (trial, redraw, grid cell) gets its own
//! ChaCha stream keyed by its index path, so results do not depend on the
//! order or thread in which items run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for the work item identified by `path` under `seed`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    let id = path
        .iter()
        .fold(0x5851_f42d_4c95_7f2d_u64, |acc, &p| splitmix64(acc ^ splitmix64(p)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// A `u64` seed derived from the work item `path`.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    use rand::RngCore;
    stream(seed, path).next_u64()
}

pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
