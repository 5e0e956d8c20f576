//! Deterministic, purpose-tagged random number generation.
//!
//! Every random draw in this crate takes an explicit seed. Independent
//! streams (coefficients, sampling points, noise, per-trial work) derive
//! their own sub-seed from `(master_seed, purpose_tag, index)` through a
//! fixed mixing function, so results never depend on call order or thread
//! scheduling. The generator itself is ChaCha8, a counter-based stream
//! cipher whose output is stable across platforms and releases.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One round of splitmix64; a full-avalanche 64-bit finalizer.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed from a master seed, a purpose tag, and an index.
///
/// The tag is folded in byte-by-byte FNV-1a style, then the result is run
/// through splitmix64 so that nearby `(seed, index)` pairs map to unrelated
/// sub-seeds.
pub fn sub_seed(master: u64, tag: &str, index: u64) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = FNV_OFFSET;
    for &b in master
        .to_le_bytes()
        .iter()
        .chain(tag.as_bytes())
        .chain(index.to_le_bytes().iter())
    {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(h)
}

/// A ChaCha8 generator seeded from `sub_seed(master, tag, index)`.
pub fn sub_rng(master: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(master, tag, index))
}
