//! Seeded, splittable randomness.
//!
//! Every sampler pulls its stream from `(seed, purpose, index)`. The three
//! components are packed directly into the ChaCha key, so two distinct
//! purposes or indices never share a stream and adding a new sampler cannot
//! shift the values an existing one produces.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// 64-bit FNV-1a; only used to turn a purpose tag into key material.
fn tag_hash(tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive the RNG stream for `purpose` and sub-index `index` under `seed`.
pub fn stream(seed: u64, purpose: &str, index: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag_hash(purpose).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    key[24..32].copy_from_slice(&(purpose.len() as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Derive a child seed, for handing a sub-experiment its own seed value.
pub fn child_seed(seed: u64, purpose: &str, index: u64) -> u64 {
    use rand::RngCore;
    stream(seed, purpose, index).next_u64()
}
