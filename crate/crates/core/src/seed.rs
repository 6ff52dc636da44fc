//! Counter-based seed derivation.
//!
//! Every random stream in a fit is addressed by a path of integers below the
//! master seed (replication index, subset index, tree index, ...). The stream
//! seed is a pure function of that path, so the work can be scheduled on any
//! number of threads without changing a single draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG used for every stochastic step.
pub type LessRng = ChaCha8Rng;

pub(crate) const STREAM_REPLICATION: u64 = 0x5245_5043;
pub(crate) const STREAM_LOCAL: u64 = 0x4c4f_4341;
pub(crate) const STREAM_FOREST: u64 = 0x464f_5245;
pub(crate) const STREAM_FOLDS: u64 = 0x464f_4c44;
pub(crate) const STREAM_CV_FIT: u64 = 0x4356_4649;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of the stream addressed by `path` under `master`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_from_seed(seed: u64) -> LessRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derive_rng(master: u64, path: &[u64]) -> LessRng {
    rng_from_seed(derive_seed(master, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_are_distinct() {
        let a = derive_seed(7, &[1, 2]);
        let b = derive_seed(7, &[2, 1]);
        let c = derive_seed(7, &[1, 2, 0]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, &[1, 2]));
    }
}
