//! Seeded, splittable random source.
//!
//! Every experiment draws from ChaCha8 streams keyed by `(seed, stream)`, so
//! batch results are independent of scheduling and thread count. The
//! generator name is recorded in report output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GENERATOR_NAME: &str = "chacha8";

/// Derive the substream for `(seed, stream)`; stream 0 is the root stream.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&stream.to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}
