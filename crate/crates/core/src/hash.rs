//! Seeded 64-bit mixing used for every hash in the crate.
//!
//! The position hash `h`, the checksum hash `γ`, IBLT cell locations and
//! seed derivation all go through [`hash64`]. It is the splitmix64
//! finalizer applied twice around a seed injection, which gives full
//! avalanche on both the key and the seed. It is treated as an ideal random
//! function; no k-wise independence is claimed.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash `key` under `seed`.
#[inline]
pub fn hash64(seed: u64, key: u64) -> u64 {
    mix64(mix64(key.wrapping_add(GOLDEN)) ^ seed.wrapping_mul(GOLDEN).rotate_left(17))
}

/// Derive the `index`-th child seed of `master`.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    hash64(master ^ 0x5eed_5eed_5eed_5eed, index)
}
