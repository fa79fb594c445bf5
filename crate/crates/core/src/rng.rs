//! Seeded random streams.
//!
//! All randomness goes through ChaCha8, a counter-based generator, seeded
//! from an explicit 64-bit value. Sub-streams (per sweep point, per trial)
//! are derived by hashing the parent seed with the indices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name recorded next to every seed in output files.
pub const GENERATOR_NAME: &str = "chacha8";

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent child seed from `base` and a path of indices.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut h = mix64(base.wrapping_add(0x9e37_79b9_7f4a_7c15));
    for &p in path {
        h = mix64(h ^ mix64(p.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}
