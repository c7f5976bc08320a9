//! Deterministic child-seed derivation.
//!
//! Every random stream in a run (weight init, shuffling, DP noise, splits,
//! shadow-pool draws) gets its own seed derived from the master seed, a
//! stage label, and an index. Reordering stages or adding new ones never
//! perturbs the streams of existing stages.

use sha2::{Digest, Sha256};

/// First eight little-endian bytes of `SHA-256(le64(master) || label ||
/// le64(index))`.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}
