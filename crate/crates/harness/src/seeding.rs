//! Per-trial seeds.
//!
//! Trial `i` of a run with master seed `m` uses
//! `splitmix64(m ^ splitmix64(i))`, where `splitmix64` is the standard
//! SplitMix64 finalizer (increment `0x9E3779B97F4A7C15`, multipliers
//! `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`). Every random stream is a
//! `ChaCha8Rng::seed_from_u64` of such a seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(master ^ splitmix64(trial))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
