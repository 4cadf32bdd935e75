//! Deterministic randomness for simulation runs.
//!
//! A run owns a single root seed. Every consumer derives its own ChaCha
//! stream from `(seed, label, indices)`, so adding or removing an
//! instrumentation consumer never shifts the draws seen by another.
//! Protocol draws are typically keyed per `(round, edge)` which also makes
//! them independent of edge processing order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Root of a run's randomness. Cheap to copy; streams are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunRng {
    seed: u64,
}

impl RunRng {
    pub fn new(seed: u64) -> Self {
        RunRng { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Mixes the label and indices into a 64-bit subseed.
    pub fn derive(&self, label: &str, ids: &[u64]) -> u64 {
        let mut s = splitmix(self.seed ^ fnv1a(label));
        for &id in ids {
            s = splitmix(s ^ id.wrapping_mul(GOLDEN));
        }
        s
    }

    /// A fresh ChaCha stream for one consumer.
    pub fn stream(&self, label: &str, ids: &[u64]) -> ChaCha8Rng {
        let mut s = self.derive(label, ids);
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            s = splitmix(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }

    /// A derived root, used to give every run of a sweep its own seed space.
    pub fn child(&self, label: &str, ids: &[u64]) -> RunRng {
        RunRng {
            seed: self.derive(label, ids),
        }
    }
}
