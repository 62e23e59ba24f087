//! Seeded randomness.
//!
//! All randomized operations use ChaCha20 (`rand_chacha::ChaCha20Rng`), which
//! is portable and produces the same stream on every platform. Independent
//! streams are selected with the 64-bit ChaCha stream id, and child seeds are
//! derived with the SplitMix64 finalizer so recursion trees and parallel
//! sample loops are reproducible regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type CodeRng = ChaCha20Rng;

/// Generator for `seed` on stream `stream`.
pub fn stream(seed: u64, stream: u64) -> CodeRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer applied to `seed + tag * golden`.
pub fn derive(seed: u64, tag: u64) -> u64 {
    let mut z = seed.wrapping_add(tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
