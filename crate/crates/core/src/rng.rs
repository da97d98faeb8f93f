//! Reproducible random streams.
//!
//! Every Monte-Carlo task draws from a ChaCha8 generator keyed by a
//! `(seed, stream)` pair. Child streams are derived by mixing a key into the
//! stream id, so replicates, grid points and sub-steps each get their own
//! independent sequence regardless of the order in which they execute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies one deterministic random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// A child stream, independent of `self` and of siblings with other keys.
    pub fn derive(&self, key: u64) -> Self {
        Self {
            seed: self.seed,
            stream: mix(self.stream ^ mix(key.wrapping_add(0x9e37_79b9_7f4a_7c15))),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a hash, used to key streams by names.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
