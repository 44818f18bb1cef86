//! Named sub-seed derivation.
//!
//! Every randomized stage (merge, balance, split, tree shuffle, SMO pair
//! selection, corpus generation) draws from its own stream derived from the
//! single user-facing seed, so rerunning one stage never perturbs another.

use sha2::{Digest, Sha256};

/// Derives a deterministic sub-seed for a named purpose.
pub fn derive(seed: u64, purpose: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(b":");
    hasher.update(purpose.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is at least 8 bytes"))
}
