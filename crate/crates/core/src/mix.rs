//! Versioned bit mixing shared by site colorings and replica seeding.
//!
//! The constants and composition below are a reproducibility contract:
//! changing any of them changes every coloring and every per-replica seed,
//! so bump [`MIX_VERSION`] whenever they change.

/// Identifier recorded in experiment manifests.
pub const MIX_VERSION: &str = "splitmix64-site-v1";

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const SITE_SALT: u64 = 0x5851_f42d_4c95_7f2d;
const REPLICA_SALT: u64 = 0x2545_f491_4f6c_dd1d;

/// SplitMix64 finalizer (full avalanche on all 64 input bits).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-seed key used by [`site_bits`]; precompute once per coloring.
#[inline]
pub fn site_key(seed: u64) -> u64 {
    mix64(seed ^ SITE_SALT)
}

/// 64 mixed bits for the site `(x, y)` under a key from [`site_key`].
#[inline]
pub fn site_bits(key: u64, x: i32, y: i32) -> u64 {
    let packed = ((x as u32 as u64) << 32) | (y as u32 as u64);
    mix64(mix64(packed).wrapping_add(key))
}

/// Seed of replica `index` under `master`.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master ^ REPLICA_SALT).wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}
