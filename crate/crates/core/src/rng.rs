//! Counter-derived seeding.
//!
//! Every random stream in the crate is a ChaCha generator keyed by a 64-bit
//! seed derived from the user seed plus a small tuple of counters (stream tag,
//! item index). Workers never share RNG state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a base seed with a list of counters into a new seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(base: u64, parts: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(base, parts))
}

/// Draw an index from an unnormalised-safe probability vector by inversion.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

// stream tags
pub(crate) const TAG_CHAIN: u64 = 0x01;
pub(crate) const TAG_CODEBOOK: u64 = 0x02;
pub(crate) const TAG_TRIAL: u64 = 0x03;
pub(crate) const TAG_WEIGHTS: u64 = 0x04;
pub(crate) const TAG_CALIBRATE: u64 = 0x05;
