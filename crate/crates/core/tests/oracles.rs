//! Brute-force oracles for detection, metrics and the worst-case PEP.

use chd_core::channel::{draw_iid, ChannelMatrix};
use chd_core::engine::{pep_from_distance, q_function, theoretical_pep};
use chd_core::rng::stream;
use chd_core::selection::{DifferenceSet, Mode};
use chd_core::signal::{ml_detect_uplink, synthesize_uplink, Constellation, NoiseParams, SymbolVector};
use chd_core::Complex64;
use proptest::prelude::*;

fn all_vectors(alphabet: &Constellation, len: usize) -> Vec<Vec<Complex64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                alphabet.points().iter().map(move |&s| {
                    let mut v = prefix.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    out
}

fn image_norm(h: &ChannelMatrix, x: &[Complex64]) -> f64 {
    (0..h.rows())
        .map(|r| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, xc) in x.iter().enumerate() {
                acc += h.get(r, c) * xc;
            }
            acc.norm_sqr()
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ml_matches_exhaustive_argmin(seed in any::<u64>(), ms in 1usize..3, qpsk in any::<bool>(), snr in -5.0..20.0f64) {
        let alphabet = if qpsk && ms == 1 { Constellation::qpsk() } else { Constellation::bpsk() };
        let mut rng = stream(seed, &[1]);
        let es = 10f64.powf(snr / 10.0);
        let h = draw_iid(4 * ms, 2 * ms, 1.0, &mut rng).unwrap();
        let cands = all_vectors(&alphabet, 2 * ms);
        let x = SymbolVector::new(cands[seed as usize % cands.len()].clone(), &alphabet).unwrap();
        let y = synthesize_uplink(&x, &h, es, ms, &NoiseParams::default(), &mut rng).unwrap();
        let gain = (es / ms as f64).sqrt();
        let mut best = (f64::INFINITY, 0);
        for (i, c) in cands.iter().enumerate() {
            let hx: Vec<Complex64> = (0..h.rows())
                .map(|r| c.iter().enumerate().map(|(k, s)| h.get(r, k) * s).sum::<Complex64>() * gain)
                .collect();
            let m: f64 = y.iter().zip(&hx).map(|(a, b)| (a - b).norm_sqr()).sum();
            if m < best.0 {
                best = (m, i);
            }
        }
        let got = ml_detect_uplink(&y, &h, es, ms, &alphabet).unwrap();
        prop_assert_eq!(got.as_slice(), cands[best.1].as_slice());
    }

    #[test]
    fn difference_enumeration_equals_pairwise(seed in any::<u64>(), len in 1usize..5, qpsk in any::<bool>()) {
        let alphabet = if qpsk && len <= 3 { Constellation::qpsk() } else { Constellation::bpsk() };
        let mut rng = stream(seed, &[2]);
        let h = draw_iid(len + 1, len, 1.0, &mut rng).unwrap();
        let cands = all_vectors(&alphabet, len);
        let mut pairwise = f64::INFINITY;
        for i in 0..cands.len() {
            for j in i + 1..cands.len() {
                let d: Vec<Complex64> = cands[i].iter().zip(&cands[j]).map(|(a, b)| a - b).collect();
                pairwise = pairwise.min(image_norm(&h, &d));
            }
        }
        prop_assert_eq!(DifferenceSet::new(&alphabet, len).min_image_norm_sqr(&h), pairwise);
    }

    #[test]
    fn pep_is_bounded_and_monotone(seed in any::<u64>(), ms in 1usize..3, e1 in 0.01..100.0f64, e2 in 0.01..100.0f64) {
        let alphabet = Constellation::bpsk();
        let mut rng = stream(seed, &[3]);
        let up = draw_iid(4 * ms, 2 * ms, 1.0, &mut rng).unwrap();
        let down = draw_iid(ms, ms, 1.0, &mut rng).unwrap();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        for (h, mode) in [(&up, Mode::Ma), (&down, Mode::Bc)] {
            let a = theoretical_pep(h, mode, lo, ms, 1.0, &alphabet);
            let b = theoretical_pep(h, mode, hi, ms, 1.0, &alphabet);
            prop_assert!((0.0..=0.75).contains(&a));
            prop_assert!(b <= a);
        }
    }
}

#[test]
fn q_matches_series_expansion() {
    // Q(x) = 1/2 - phi-integral, via the Maclaurin series of erf.
    for &x in &[0.0, 0.25, 0.5, 1.0, 1.5, 2.0] {
        let z: f64 = x / std::f64::consts::SQRT_2;
        let mut term = z;
        let mut sum = z;
        for n in 1..80 {
            term *= -z * z / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        let erf = 2.0 / std::f64::consts::PI.sqrt() * sum;
        assert!((q_function(x) - 0.5 * (1.0 - erf)).abs() < 1e-14, "x = {x}");
    }
    assert_eq!(pep_from_distance(0.0, 1.0, 1, 1.0), 0.75);
}
