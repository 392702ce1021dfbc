//! Seeding.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] whose seed is
//! derived from a user-visible [`RngSeed`]. Independent purposes (graph
//! generation, feature noise, split, weight init, dropout) use separate
//! streams obtained with [`RngSeed::stream`], so changing e.g. the dropout
//! rate never perturbs the generated graph.
//!
//! Child seeds are derived with the SplitMix64 finalizer. For a fixed parent,
//! [`RngSeed::child`] is injective in the child index: the index is mapped
//! through `parent + (index + 1) * GOLDEN_GAMMA` (injective mod 2^64 since the
//! gamma is odd) and then through the finalizer, which is a bijection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random streams used by the generators and the trainer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Graph = 1,
    Features = 2,
    Split = 3,
    Init = 4,
    Dropout = 5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        RngSeed(seed)
    }

    /// Derives the seed of child `index` (a run, a grid cell, a replica).
    pub fn child(self, index: u64) -> RngSeed {
        RngSeed(splitmix64(
            self.0
                .wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
        ))
    }

    /// Seed of an independent stream for one purpose.
    pub fn stream(self, stream: Stream) -> RngSeed {
        RngSeed(splitmix64(self.0 ^ splitmix64(stream as u64)))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    pub fn stream_rng(self, stream: Stream) -> ChaCha8Rng {
        self.stream(stream).rng()
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        RngSeed(seed)
    }
}
