//! Deterministic RNG plumbing.
//!
//! A single root seed drives every stochastic component. Independent streams
//! are forked by stable string labels, so adding or reordering consumers never
//! perturbs the draws seen by existing ones.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub(crate) fn fnv1a(bytes: &[u8], mut hash: u64) -> u64 {
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Factory for labelled, reproducible RNG streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngForge {
    root_seed: u64,
}

impl RngForge {
    pub fn new(root_seed: u64) -> Self {
        RngForge { root_seed }
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    /// Forks an independent generator for `label`. The same (seed, label)
    /// pair always yields the same stream.
    pub fn fork(&self, label: &str) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let mut h = fnv1a(&self.root_seed.to_le_bytes(), FNV_OFFSET);
        h = fnv1a(label.as_bytes(), h);
        for chunk in seed.chunks_mut(8) {
            h = fnv1a(&h.to_le_bytes(), h ^ FNV_PRIME);
            chunk.copy_from_slice(&h.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }

    /// Convenience for labels assembled from a prefix and an index.
    pub fn fork_indexed(&self, prefix: &str, index: usize) -> ChaCha8Rng {
        self.fork(&format!("{prefix}#{index}"))
    }
}
