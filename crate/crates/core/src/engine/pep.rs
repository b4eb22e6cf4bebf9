//! Worst-case pairwise error probability of the selected channel.

use crate::channel::ChannelMatrix;
use crate::selection::{DifferenceSet, Mode};
use crate::signal::Constellation;

/// Standard normal tail probability `P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// `D'_min`: `min ||H d||^2` in MA mode, half of it in BC mode.
pub fn min_distance(h: &ChannelMatrix, mode: Mode, diffs: &DifferenceSet) -> f64 {
    let d = diffs.min_image_norm_sqr(h);
    match mode {
        Mode::Ma => d,
        Mode::Bc => 0.5 * d,
    }
}

/// `1 - (1 - Q(sqrt(E_S D'_min / (2 N_0 M_S))))^2`.
pub fn pep_from_distance(d_min: f64, es: f64, ms: usize, n0: f64) -> f64 {
    let q = q_function(libm::sqrt(es * d_min / (2.0 * n0 * ms as f64)));
    1.0 - (1.0 - q) * (1.0 - q)
}

/// Worst-case PEP of `h` used in `mode`. The candidate length is the
/// matrix width.
pub fn theoretical_pep(h: &ChannelMatrix, mode: Mode, es: f64, ms: usize, n0: f64, alphabet: &Constellation) -> f64 {
    let diffs = DifferenceSet::new(alphabet, h.cols());
    pep_from_distance(min_distance(h, mode, &diffs), es, ms, n0)
}
