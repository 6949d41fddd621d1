//! Seeded randomness.
//!
//! All randomness flows through [`ChaCha8Rng`] seeded with
//! `SeedableRng::seed_from_u64`. ChaCha8 has a fixed, portable output stream,
//! and `rand` 0.8 maps 64-bit words to `f64` in `[0, 1)` by keeping the top 53
//! bits, so every generated cloud or factor vector is bit-reproducible across
//! platforms. Independent sub-streams (per trial, per scenario) get their seed
//! from [`derive_seed`].

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser applied to `base` offset by `stream`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
