//! Deterministic random sub-streams.
//!
//! Every random quantity in a run is drawn from a ChaCha8 stream whose seed
//! is a pure function of the master seed and a short path of tags (purpose,
//! slot, link, ...). Evaluation order therefore never changes results.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type StreamRng = ChaCha8Rng;

/// Stream purposes, used as the first tag under a cell seed.
pub mod tag {
    pub const CHANNEL: u64 = 0x6368_616e;
    pub const CSI: u64 = 0x6373_6921;
    pub const TRAFFIC: u64 = 0x7472_6166;
    pub const NOISE: u64 = 0x6e6f_6973;
    pub const CALIBRATION: u64 = 0x6361_6c69;
    pub const CELL: u64 = 0x6365_6c6c;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `tags` into `master` with SplitMix64. The result depends on the
/// order of the tags.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(master), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn stream(master: u64, tags: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, tags))
}

/// Circularly-symmetric complex Gaussian sample with total variance
/// `variance` (half per real dimension).
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = libm::sqrt(variance / 2.0);
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Uniform random bit.
#[inline]
pub fn bit<R: Rng + ?Sized>(rng: &mut R) -> u8 {
    rng.random::<bool>() as u8
}
