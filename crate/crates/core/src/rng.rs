//! Seed derivation and random streams.
//!
//! Every random stream in the crate is a ChaCha8 generator whose 32-byte key
//! is filled with four consecutive SplitMix64 outputs started at a 64-bit
//! stream seed. Child seeds are derived with [`mix`]:
//!
//! ```text
//! splitmix64(x) = finalize(x + 0x9E3779B97F4A7C15)
//! finalize(z)   = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!                 z ^= z >> 27; z *= 0x94D049BB133111EB; z ^ (z >> 31)
//! mix(seed, i)  = splitmix64(seed ^ splitmix64(i))
//! ```
//!
//! All arithmetic is wrapping on `u64`, so results are identical on every
//! platform. Standard normal deviates come from `rand_distr::StandardNormal`
//! (ziggurat).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of child stream `index` from `seed`.
pub fn mix(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Opens the random stream identified by `seed`.
pub fn stream(seed: u64) -> StreamRng {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        let word = splitmix64(state);
        state = state.wrapping_add(GOLDEN_GAMMA);
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
