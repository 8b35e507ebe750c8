//! Seeded random streams.
//!
//! Every random decision in the harness draws from [`ChaCha8Rng`] seeded via
//! `SeedableRng::seed_from_u64` (rand_core's PCG32 expansion of the `u64` into
//! the 32-byte ChaCha key). Uniform reals are `rand`'s standard `f64`
//! conversion: the top 53 bits of a `u64` scaled by 2^-53, giving `[0, 1)`.
//!
//! Sub-seeds are derived with [`derive_seed`], never from thread or
//! scheduling order, so parallel execution stays reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type HarnessRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> HarnessRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combines a base seed with a stream tag into an independent sub-seed.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(mix64(seed) ^ tag.rotate_left(17) ^ 0x5851_f42d_4c95_7f2d)
}

/// Stable integer key for a deletion fraction (parts per million), so that
/// `0.15` produced by different arithmetic paths maps to the same stream.
pub fn fraction_key(p: f64) -> u64 {
    (p * 1e6).round() as u64
}

/// Seed for the deletion draw at fraction `p`.
pub fn percentage_seed(seed: u64, p: f64) -> u64 {
    derive_seed(seed, fraction_key(p))
}
