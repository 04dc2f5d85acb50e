//! Deterministic random streams.
//!
//! Every stochastic operation draws from a stream keyed by
//! `(master_seed, instance_id, tag)`. The key is hashed into a ChaCha20 key,
//! whose keystream is a pure function of (key, block counter), so results do
//! not depend on the order or thread in which instances are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub type Stream = ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64) -> Self {
        RngSpec { master_seed }
    }

    pub fn stream(&self, instance_id: u64, tag: &str) -> Stream {
        derive_stream(*self, instance_id, tag)
    }
}

pub fn derive_stream(spec: RngSpec, instance_id: u64, tag: &str) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(b"uxeval/stream/v1");
    hasher.update(spec.master_seed.to_le_bytes());
    hasher.update(instance_id.to_le_bytes());
    hasher.update((tag.len() as u64).to_le_bytes());
    hasher.update(tag.as_bytes());
    ChaCha20Rng::from_seed(hasher.finalize().into())
}
