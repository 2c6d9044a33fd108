//! Counter-based seed splitting.
//!
//! Every random draw in the crate is keyed by `(master, stream, counter)`, so
//! a sample's randomness does not depend on which thread computed it or in
//! which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const STREAM_COUPLINGS: u64 = 0x636f_7570;
pub(crate) const STREAM_FRAGMENTS: u64 = 0x6672_6167;
pub(crate) const STREAM_HAAR: u64 = 0x6861_6172;
pub(crate) const STREAM_BASES: u64 = 0x6261_7365;
pub(crate) const STREAM_OUTCOMES: u64 = 0x6f75_7463;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent seed for sub-task `counter` of `stream`.
pub fn split_seed(master: u64, stream: u64, counter: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream)) ^ counter.wrapping_mul(0xd605_bbb5_8c8a_bf3d))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
