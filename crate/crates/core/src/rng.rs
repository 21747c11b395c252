//! Deterministic seed derivation.
//!
//! All randomness in the crate flows from a single root seed. Independent
//! streams (chains, replications, simulation stages) derive their own seeds
//! through [`split_seed`], a SplitMix64-style mix of the root seed and a
//! stream index. The generator everywhere is ChaCha12, which produces the
//! same byte stream on every platform.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives the seed of stream `stream` from a root seed.
///
/// Defined as two SplitMix64 finalizer rounds over `root` and the stream
/// index, so that nearby roots and nearby stream indices yield unrelated
/// streams.
pub fn split_seed(root: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(root) ^ splitmix64(stream.wrapping_add(0x51_7c_c1_b7_27_22_0a_95)))
}

/// A reproducible generator for the given (root, stream) pair.
pub fn stream_rng(root: u64, stream: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(split_seed(root, stream))
}
