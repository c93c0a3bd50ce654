//! Deterministic random streams.
//!
//! One user seed fans out into independent ChaCha streams addressed by a
//! label and a counter, so batches can be evaluated in any order (or
//! concurrently) and still reproduce the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Trials per random stream in the property sweeps.
pub const BATCH: usize = 4096;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Stream `index` of the family `(seed, label)`.
pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ fnv1a(label)));
    rng.set_stream(index);
    rng
}
