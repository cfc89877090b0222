//! Reproducible per-replicate random streams.
//!
//! Each `(master_seed, replicate_index)` pair selects a ChaCha8 key and a
//! 64-bit stream id. ChaCha is counter-based, so streams are independent of
//! the order in which replicates are processed and of the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer, used to derive sub-seeds from labels.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent master seed for a named sub-campaign.
pub fn derive_seed(master_seed: u64, label: &str) -> u64 {
    label
        .bytes()
        .fold(splitmix64(master_seed), |acc, b| splitmix64(acc ^ u64::from(b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReplicateStream {
    pub master_seed: u64,
    pub replicate_index: u64,
}

impl ReplicateStream {
    pub fn new(master_seed: u64, replicate_index: u64) -> Self {
        Self {
            master_seed,
            replicate_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.replicate_index);
        rng
    }
}
