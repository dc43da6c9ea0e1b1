//! Seed derivation. Every random choice is drawn from a ChaCha stream keyed
//! by a base seed and a counter, so reports are bit-reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mixes `key` into `seed` (SplitMix64 finalizer over both words).
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    let mut z = seed
        .wrapping_add(key.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one search round: stream `round` of the seed's ChaCha key.
pub fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}
