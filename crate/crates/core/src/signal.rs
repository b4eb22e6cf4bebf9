//! Modulation, AWGN synthesis, exhaustive ML detection and XOR network
//! coding.
//!
//! Symbol labels map to bits most-significant-bit first. Candidate vectors
//! are enumerated in a fixed canonical order: candidate `c` carries, at
//! entry `i`, the `i`-th most significant base-`Ns` digit of `c`. For BPSK
//! this is "bits read as an integer, ascending", with entry 0 as the MSB.
//! Every detector breaks ties towards the lowest candidate index.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::ChannelMatrix;
use crate::error::{invalid, Error, Result};
use crate::rng::complex_gaussian;

/// A finite unit-average-energy constellation with `2^b` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    bits_per_symbol: usize,
}

impl Constellation {
    /// Bit 0 maps to +1, bit 1 to -1.
    pub fn bpsk() -> Self {
        Self {
            points: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            bits_per_symbol: 1,
        }
    }

    /// Gray-mapped QPSK, label `b0 b1` maps to `((1-2 b0) + j (1-2 b1)) / sqrt 2`.
    pub fn qpsk() -> Self {
        let a = core::f64::consts::FRAC_1_SQRT_2;
        let points = (0..4u8)
            .map(|l| {
                let b0 = (l >> 1) & 1;
                let b1 = l & 1;
                Complex64::new(a * (1.0 - 2.0 * b0 as f64), a * (1.0 - 2.0 * b1 as f64))
            })
            .collect();
        Self {
            points,
            bits_per_symbol: 2,
        }
    }

    /// Number of points, `N_s`.
    #[inline]
    pub fn order(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    #[inline]
    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn label_of(&self, s: Complex64) -> Option<usize> {
        self.points.iter().position(|p| *p == s)
    }

    /// Maps `len * b` bits onto `len` symbols, `b` consecutive bits each.
    pub fn modulate(&self, bits: &[u8]) -> Result<SymbolVector> {
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(Error::NonBinary { index: i });
        }
        let b = self.bits_per_symbol;
        if !bits.len().is_multiple_of(b) {
            return Err(Error::DimensionMismatch {
                expected: bits.len() / b * b + b,
                actual: bits.len(),
            });
        }
        let symbols = bits
            .chunks(b)
            .map(|chunk| self.points[chunk.iter().fold(0usize, |acc, &x| (acc << 1) | x as usize)])
            .collect();
        Ok(SymbolVector { symbols })
    }

    /// Inverse of [`modulate`](Self::modulate) for symbols in the alphabet.
    pub fn demodulate(&self, x: &SymbolVector) -> Result<Vec<u8>> {
        let b = self.bits_per_symbol;
        let mut out = Vec::with_capacity(x.len() * b);
        for (i, s) in x.symbols.iter().enumerate() {
            let label = self.label_of(*s).ok_or(Error::NotInAlphabet { index: i })?;
            out.extend((0..b).rev().map(|shift| ((label >> shift) & 1) as u8));
        }
        Ok(out)
    }

    /// Labels of canonical candidate `index` for vectors of length `len`.
    pub fn candidate_labels(&self, index: usize, len: usize) -> Vec<usize> {
        let ns = self.order();
        let mut labels = vec![0; len];
        let mut c = index;
        for slot in labels.iter_mut().rev() {
            *slot = c % ns;
            c /= ns;
        }
        labels
    }

    /// All `N_s^len` candidate vectors in canonical order.
    pub fn candidates(&self, len: usize) -> Vec<SymbolVector> {
        let count = self.order().pow(len as u32);
        (0..count)
            .map(|c| SymbolVector {
                symbols: self
                    .candidate_labels(c, len)
                    .into_iter()
                    .map(|l| self.points[l])
                    .collect(),
            })
            .collect()
    }
}

/// A vector of constellation symbols sent in one channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolVector {
    symbols: Vec<Complex64>,
}

impl SymbolVector {
    /// Validates every entry against `alphabet`.
    pub fn new(symbols: Vec<Complex64>, alphabet: &Constellation) -> Result<Self> {
        if let Some(i) = symbols.iter().position(|s| alphabet.label_of(*s).is_none()) {
            return Err(Error::NotInAlphabet { index: i });
        }
        Ok(Self { symbols })
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Concatenation `[self; other]`.
    pub fn stacked(&self, other: &SymbolVector) -> SymbolVector {
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        SymbolVector { symbols }
    }

    pub fn split_at(&self, mid: usize) -> (SymbolVector, SymbolVector) {
        let (a, b) = self.symbols.split_at(mid);
        (
            SymbolVector { symbols: a.to_vec() },
            SymbolVector { symbols: b.to_vec() },
        )
    }
}

pub fn bpsk_modulate(bits: &[u8]) -> Result<SymbolVector> {
    Constellation::bpsk().modulate(bits)
}

pub fn bpsk_demodulate(x: &SymbolVector) -> Result<Vec<u8>> {
    Constellation::bpsk().demodulate(x)
}

/// Binary matrix of shape `streams x len`, stored row-major. Row `s` is
/// the bit sequence carried by stream (antenna / packet) `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitBlock {
    streams: usize,
    len: usize,
    bits: Vec<u8>,
}

impl BitBlock {
    pub fn new(streams: usize, len: usize, bits: Vec<u8>) -> Result<Self> {
        if streams == 0 || len == 0 {
            return Err(Error::InvalidShape {
                rows: streams,
                cols: len,
            });
        }
        if bits.len() != streams * len {
            return Err(Error::DimensionMismatch {
                expected: streams * len,
                actual: bits.len(),
            });
        }
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(Error::NonBinary { index: i });
        }
        Ok(Self { streams, len, bits })
    }

    pub fn zeros(streams: usize, len: usize) -> Result<Self> {
        Self::new(streams, len, vec![0; streams * len])
    }

    pub fn random<R: Rng + ?Sized>(streams: usize, len: usize, rng: &mut R) -> Result<Self> {
        let bits = (0..streams * len).map(|_| crate::rng::bit(rng)).collect();
        Self::new(streams, len, bits)
    }

    /// Stacks rows into a block; all rows must share a length.
    pub fn from_rows<'a>(rows: impl IntoIterator<Item = &'a [u8]>) -> Result<Self> {
        let mut bits = Vec::new();
        let mut streams = 0;
        let mut len = None;
        for row in rows {
            match len {
                None => len = Some(row.len()),
                Some(l) if l != row.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: l,
                        actual: row.len(),
                    })
                }
                _ => {}
            }
            bits.extend_from_slice(row);
            streams += 1;
        }
        Self::new(streams, len.unwrap_or(0), bits)
    }

    #[inline]
    pub fn streams(&self) -> usize {
        self.streams
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, stream: usize, pos: usize) -> u8 {
        self.bits[stream * self.len + pos]
    }

    /// Sets one bit; `value` is reduced to its lowest bit.
    #[inline]
    pub fn set(&mut self, stream: usize, pos: usize, value: u8) {
        self.bits[stream * self.len + pos] = value & 1;
    }

    pub fn row(&self, stream: usize) -> &[u8] {
        &self.bits[stream * self.len..(stream + 1) * self.len]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    /// Bits `[start, start + width)` of every stream, stream-major.
    pub fn column_bits(&self, start: usize, width: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.streams * width);
        for s in 0..self.streams {
            out.extend_from_slice(&self.row(s)[start..start + width]);
        }
        out
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.streams != other.streams {
            return Err(Error::DimensionMismatch {
                expected: self.streams,
                actual: other.streams,
            });
        }
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(())
    }

    /// Number of differing positions.
    pub fn hamming(&self, other: &Self) -> Result<u64> {
        self.check_same_shape(other)?;
        Ok(self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count() as u64)
    }
}

/// Bitwise XOR of the two decoded source blocks (network-coded payload).
pub fn xor_combine(a: &BitBlock, b: &BitBlock) -> Result<BitBlock> {
    a.check_same_shape(b)?;
    let bits = a.bits.iter().zip(&b.bits).map(|(x, y)| x ^ y).collect();
    Ok(BitBlock {
        streams: a.streams,
        len: a.len,
        bits,
    })
}

/// Recovers the partner's bits from the own bits and the decoded XOR.
pub fn xor_recover(own: &BitBlock, zhat: &BitBlock) -> Result<BitBlock> {
    xor_combine(own, zhat)
}

/// AWGN level. Disabled noise produces exactly noiseless observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    n0: f64,
    enabled: bool,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self { n0: 1.0, enabled: true }
    }
}

impl NoiseParams {
    pub fn new(n0: f64) -> Result<Self> {
        if !(n0 > 0.0) || !n0.is_finite() {
            return Err(invalid("n0", "must be positive and finite"));
        }
        Ok(Self { n0, enabled: true })
    }

    /// Noiseless channel with nominal level `n0` kept for SNR bookkeeping.
    pub fn disabled(n0: f64) -> Result<Self> {
        Ok(Self {
            enabled: false,
            ..Self::new(n0)?
        })
    }

    #[inline]
    pub fn n0(&self) -> f64 {
        self.n0
    }

    #[inline]
    pub fn enabled(&self) -> bool {
        self.enabled
    }
}

/// Transmit energies of the two phases; the model requires them equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBudget {
    pub source: f64,
    pub relay: f64,
}

impl EnergyBudget {
    pub fn symmetric(e: f64) -> Self {
        Self { source: e, relay: e }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.source > 0.0) || !self.source.is_finite() {
            return Err(invalid("energy", "must be positive and finite"));
        }
        if self.relay != self.source {
            return Err(Error::EnergyAsymmetry {
                source_energy: self.source,
                relay: self.relay,
            });
        }
        Ok(())
    }
}

/// Amplitude of the uplink: `sqrt(E_S / M_S)`.
#[inline]
pub fn uplink_gain(es: f64, ms: usize) -> f64 {
    libm::sqrt(es / ms as f64)
}

/// Amplitude of the downlink: `sqrt(E_Rf / (2 M_S))`.
#[inline]
pub fn downlink_gain(erf: f64, ms: usize) -> f64 {
    libm::sqrt(erf / (2.0 * ms as f64))
}

fn synthesize<R: Rng + ?Sized>(
    x: &SymbolVector,
    h: &ChannelMatrix,
    gain: f64,
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let mut y = h.mul_vec(x.as_slice())?;
    for v in y.iter_mut() {
        *v *= gain;
        if noise.enabled {
            *v += complex_gaussian(rng, noise.n0);
        }
    }
    Ok(y)
}

/// `y = sqrt(E_S / M_S) H x + n` at the receiving relay.
pub fn synthesize_uplink<R: Rng + ?Sized>(
    x: &SymbolVector,
    h: &ChannelMatrix,
    es: f64,
    ms: usize,
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if x.len() != 2 * ms {
        return Err(Error::DimensionMismatch {
            expected: 2 * ms,
            actual: x.len(),
        });
    }
    synthesize(x, h, uplink_gain(es, ms), noise, rng)
}

/// `y = sqrt(E_Rf / (2 M_S)) (H^v + H^v') z + n` at one source.
pub fn synthesize_downlink<R: Rng + ?Sized>(
    z: &SymbolVector,
    hcomb: &ChannelMatrix,
    energy: &EnergyBudget,
    ms: usize,
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    energy.validate()?;
    if z.len() != ms {
        return Err(Error::DimensionMismatch {
            expected: ms,
            actual: z.len(),
        });
    }
    if hcomb.rows() != ms || hcomb.cols() != ms {
        return Err(Error::DimensionMismatch {
            expected: ms,
            actual: hcomb.cols(),
        });
    }
    synthesize(z, hcomb, downlink_gain(energy.relay, ms), noise, rng)
}

/// Exhaustive ML detector for one quasi-static matrix.
///
/// The noiseless images `gain * H * x'` of all candidates are computed
/// once, so detecting each of the `T` vectors of a slot costs one pass
/// over the candidate list.
#[derive(Debug, Clone)]
pub struct MlDetector {
    rows: usize,
    len: usize,
    images: Vec<Complex64>,
}

impl MlDetector {
    pub fn new(h: &ChannelMatrix, gain: f64, alphabet: &Constellation) -> Self {
        let len = h.cols();
        let rows = h.rows();
        let count = alphabet.order().pow(len as u32);
        let mut images = Vec::with_capacity(count * rows);
        let mut x = vec![Complex64::new(0.0, 0.0); len];
        let mut hx = vec![Complex64::new(0.0, 0.0); rows];
        for c in 0..count {
            for (slot, l) in x.iter_mut().zip(alphabet.candidate_labels(c, len)) {
                *slot = alphabet.point(l);
            }
            h.mul_vec_into(&x, &mut hx)
                .expect("candidate length equals matrix width");
            images.extend(hx.iter().map(|v| v * gain));
        }
        Self { rows, len, images }
    }

    /// Candidate vector length.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn candidate_count(&self) -> usize {
        self.images.len() / self.rows
    }

    /// Index of the candidate minimising `||y - gain H x'||^2`; lowest index
    /// on ties.
    pub fn detect_index(&self, y: &[Complex64]) -> Result<usize> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                actual: y.len(),
            });
        }
        let mut best = 0;
        let mut best_metric = f64::INFINITY;
        for (c, image) in self.images.chunks_exact(self.rows).enumerate() {
            let metric: f64 = y.iter().zip(image).map(|(a, b)| (a - b).norm_sqr()).sum();
            if metric < best_metric {
                best_metric = metric;
                best = c;
            }
        }
        Ok(best)
    }
}

fn detect_vector(y: &[Complex64], hhat: &ChannelMatrix, gain: f64, alphabet: &Constellation) -> Result<SymbolVector> {
    let det = MlDetector::new(hhat, gain, alphabet);
    let c = det.detect_index(y)?;
    let symbols = alphabet
        .candidate_labels(c, det.len())
        .into_iter()
        .map(|l| alphabet.point(l))
        .collect();
    Ok(SymbolVector { symbols })
}

/// Joint ML estimate of both sources' `2 M_S` symbols at the cluster head.
pub fn ml_detect_uplink(
    y: &[Complex64],
    hhat: &ChannelMatrix,
    es: f64,
    ms: usize,
    alphabet: &Constellation,
) -> Result<SymbolVector> {
    if hhat.cols() != 2 * ms {
        return Err(Error::DimensionMismatch {
            expected: 2 * ms,
            actual: hhat.cols(),
        });
    }
    detect_vector(y, hhat, uplink_gain(es, ms), alphabet)
}

/// ML estimate of the `M_S` network-coded symbols at one source.
pub fn ml_detect_downlink(
    y: &[Complex64],
    hhat_comb: &ChannelMatrix,
    erf: f64,
    ms: usize,
    alphabet: &Constellation,
) -> Result<SymbolVector> {
    if hhat_comb.cols() != ms {
        return Err(Error::DimensionMismatch {
            expected: ms,
            actual: hhat_comb.cols(),
        });
    }
    detect_vector(y, hhat_comb, downlink_gain(erf, ms), alphabet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_iid;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn bpsk_mapping() {
        assert_eq!(bpsk_modulate(&[0, 0]).unwrap().as_slice(), re(&[1.0, 1.0]).as_slice());
        assert_eq!(bpsk_modulate(&[1, 0]).unwrap().as_slice(), re(&[-1.0, 1.0]).as_slice());
        assert_eq!(bpsk_modulate(&[0, 2]), Err(Error::NonBinary { index: 1 }));
    }

    #[test]
    fn bpsk_round_trip_exhaustive() {
        for v in 0..16u8 {
            let bits: Vec<u8> = (0..4).rev().map(|s| (v >> s) & 1).collect();
            assert_eq!(bpsk_demodulate(&bpsk_modulate(&bits).unwrap()).unwrap(), bits);
        }
    }

    #[test]
    fn qpsk_is_unit_energy_and_round_trips() {
        let q = Constellation::qpsk();
        let energy: f64 = q.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / 4.0;
        assert!((energy - 1.0).abs() < 1e-12);
        let bits = [0, 1, 1, 1, 1, 0];
        assert_eq!(q.demodulate(&q.modulate(&bits).unwrap()).unwrap(), bits);
    }

    #[test]
    fn candidate_order_is_bits_as_integer() {
        let b = Constellation::bpsk();
        let cands = b.candidates(3);
        assert_eq!(cands.len(), 8);
        assert_eq!(bpsk_demodulate(&cands[0]).unwrap(), [0, 0, 0]);
        assert_eq!(bpsk_demodulate(&cands[1]).unwrap(), [0, 0, 1]);
        assert_eq!(bpsk_demodulate(&cands[6]).unwrap(), [1, 1, 0]);
    }

    #[test]
    fn alphabet_check_rejects_zero_vector() {
        let zero = vec![Complex64::new(0.0, 0.0); 2];
        assert_eq!(
            SymbolVector::new(zero, &Constellation::bpsk()),
            Err(Error::NotInAlphabet { index: 0 })
        );
    }

    #[test]
    fn uplink_noiseless_and_identity() {
        let mut r = stream(1, &[]);
        let h = draw_iid(4, 2, 1.0, &mut r).unwrap();
        let x = bpsk_modulate(&[1, 0]).unwrap();
        let quiet = NoiseParams::disabled(1.0).unwrap();
        let y = synthesize_uplink(&x, &h, 3.0, 1, &quiet, &mut r).unwrap();
        let expect: Vec<Complex64> = h
            .mul_vec(x.as_slice())
            .unwrap()
            .iter()
            .map(|v| v * libm::sqrt(3.0))
            .collect();
        assert_eq!(y, expect);

        let eye = ChannelMatrix::identity(2).unwrap();
        let noise = NoiseParams::new(1.0).unwrap();
        let mut a = stream(2, &[]);
        let mut b = stream(2, &[]);
        let y = synthesize_uplink(&x, &eye, 1.0, 1, &noise, &mut a).unwrap();
        for (yi, xi) in y.iter().zip(x.as_slice()) {
            let n = complex_gaussian(&mut b, 1.0);
            assert!((yi - (xi + n)).norm() < 1e-15);
        }
        assert!(synthesize_uplink(&bpsk_modulate(&[0]).unwrap(), &h, 1.0, 1, &noise, &mut r).is_err());
    }

    #[test]
    fn downlink_energy_symmetry_and_sum() {
        let mut r = stream(3, &[]);
        let z = bpsk_modulate(&[0, 1]).unwrap();
        let hcomb = ChannelMatrix::identity(2)
            .unwrap()
            .add(&ChannelMatrix::identity(2).unwrap())
            .unwrap();
        let quiet = NoiseParams::disabled(1.0).unwrap();
        let y = synthesize_downlink(&z, &hcomb, &EnergyBudget::symmetric(4.0), 2, &quiet, &mut r).unwrap();
        for (yi, zi) in y.iter().zip(z.as_slice()) {
            assert!((yi - zi * 2.0 * libm::sqrt(4.0 / 4.0)).norm() < 1e-15);
        }
        let skewed = EnergyBudget {
            source: 4.0,
            relay: 2.0,
        };
        assert!(matches!(
            synthesize_downlink(&z, &hcomb, &skewed, 2, &quiet, &mut r),
            Err(Error::EnergyAsymmetry { .. })
        ));
    }

    #[test]
    fn zero_channel_ties_to_first_candidate() {
        let b = Constellation::bpsk();
        let y = vec![Complex64::new(0.3, -0.1); 4];
        let up = ml_detect_uplink(&y, &ChannelMatrix::zeros(4, 2).unwrap(), 1.0, 1, &b).unwrap();
        assert_eq!(up, b.candidates(2)[0]);
        let down = ml_detect_downlink(&y[..2], &ChannelMatrix::zeros(2, 2).unwrap(), 1.0, 2, &b).unwrap();
        assert_eq!(down, b.candidates(2)[0]);
    }

    #[test]
    fn noiseless_detection_recovers_input() {
        let b = Constellation::bpsk();
        let mut r = stream(4, &[]);
        let quiet = NoiseParams::disabled(1.0).unwrap();
        for trial in 0..50 {
            let h = draw_iid(8, 4, 1.0, &mut r).unwrap();
            let bits: Vec<u8> = (0..4).map(|s| ((trial >> s) & 1) as u8).collect();
            let x = bpsk_modulate(&bits).unwrap();
            let y = synthesize_uplink(&x, &h, 2.0, 2, &quiet, &mut r).unwrap();
            assert_eq!(ml_detect_uplink(&y, &h, 2.0, 2, &b).unwrap(), x);
        }
    }

    #[test]
    fn xor_identities() {
        let mut r = stream(5, &[]);
        let x1 = BitBlock::random(2, 10, &mut r).unwrap();
        let x2 = BitBlock::random(2, 10, &mut r).unwrap();
        let zero = BitBlock::zeros(2, 10).unwrap();
        assert_eq!(xor_combine(&x1, &x1).unwrap(), zero);
        assert_eq!(xor_combine(&x1, &zero).unwrap(), x1);
        let z = xor_combine(&x1, &x2).unwrap();
        assert_eq!(xor_recover(&x1, &z).unwrap(), x2);
        assert_eq!(xor_recover(&x2, &z).unwrap(), x1);
        let mut flipped = z.clone();
        flipped.set(1, 3, z.get(1, 3) ^ 1);
        let est = xor_recover(&x1, &flipped).unwrap();
        assert_eq!(est.hamming(&x2).unwrap(), 1);
        assert_ne!(est.get(1, 3), x2.get(1, 3));
        assert!(xor_combine(&x1, &BitBlock::zeros(1, 10).unwrap()).is_err());
    }

    #[test]
    fn bitblock_rejects_bad_input() {
        assert!(matches!(
            BitBlock::new(1, 2, vec![0, 3]),
            Err(Error::NonBinary { index: 1 })
        ));
        assert!(BitBlock::new(0, 2, vec![]).is_err());
        assert!(BitBlock::new(2, 2, vec![0; 3]).is_err());
    }

    proptest! {
        #[test]
        fn xor_chain(bits1 in proptest::collection::vec(0u8..2, 24), bits2 in proptest::collection::vec(0u8..2, 24)) {
            let x1 = BitBlock::new(3, 8, bits1).unwrap();
            let x2 = BitBlock::new(3, 8, bits2).unwrap();
            prop_assert_eq!(xor_recover(&x1, &xor_combine(&x1, &x2).unwrap()).unwrap(), x2);
        }

        #[test]
        fn detector_is_invariant_to_row_permutation(seed in 0u64..1000, shift in 1usize..4) {
            let b = Constellation::bpsk();
            let mut r = stream(seed, &[]);
            let h = draw_iid(4, 2, 1.0, &mut r).unwrap();
            let x = bpsk_modulate(&[(seed & 1) as u8, ((seed >> 1) & 1) as u8]).unwrap();
            let y = synthesize_uplink(&x, &h, 1.0, 1, &NoiseParams::default(), &mut r).unwrap();
            let perm = |i: usize| (i + shift) % 4;
            let hp = ChannelMatrix::from_fn(4, 2, |row, c| h.get(perm(row), c)).unwrap();
            let yp: Vec<Complex64> = (0..4).map(|i| y[perm(i)]).collect();
            prop_assert_eq!(
                ml_detect_uplink(&y, &h, 1.0, 1, &b).unwrap(),
                ml_detect_uplink(&yp, &hp, 1.0, 1, &b).unwrap()
            );
        }
    }
}
