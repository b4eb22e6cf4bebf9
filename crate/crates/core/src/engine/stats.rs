use alloc::vec::Vec;

/// Counters of one simulated cell (or of several merged cells).
///
/// Index 0 of the per-direction arrays is data of `S2` recovered at `S1`,
/// index 1 is data of `S1` recovered at `S2`. Merging concatenates samples
/// and adds counters; derived means sort their samples first, so results do
/// not depend on merge order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub bit_errors: [u64; 2],
    pub bits_total: [u64; 2],
    /// `delay_histogram[d]` counts delivered packets that waited `d` slots.
    pub delay_histogram: Vec<u64>,
    pub recompute_ul: u64,
    pub recompute_dl: u64,
    pub slots_total: u64,
    pub slots_ma: u64,
    pub slots_bc: u64,
    pub pep_ma: Vec<f64>,
    pub pep_bc: Vec<f64>,
    pub groups_delivered: u64,
    pub packets_delivered: u64,
    /// Packets still buffered when the run stopped.
    pub residual_packets: u64,
}

fn sorted_sum(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

fn mean_and_stderr(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = sorted_sum(values) / n;
    if values.len() < 2 {
        return Some((mean, 0.0));
    }
    let dev: Vec<f64> = values.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = sorted_sum(&dev) / (n - 1.0);
    Some((mean, libm::sqrt(var / n)))
}

impl RunStats {
    pub fn record_delay(&mut self, delay: u64) {
        let d = delay as usize;
        if self.delay_histogram.len() <= d {
            self.delay_histogram.resize(d + 1, 0);
        }
        self.delay_histogram[d] += 1;
    }

    pub fn total_bit_errors(&self) -> u64 {
        self.bit_errors.iter().sum()
    }

    pub fn total_bits(&self) -> u64 {
        self.bits_total.iter().sum()
    }

    /// End-to-end BER over both directions.
    pub fn ber(&self) -> f64 {
        let n = self.total_bits();
        if n == 0 {
            0.0
        } else {
            self.total_bit_errors() as f64 / n as f64
        }
    }

    /// Binomial standard error of [`ber`](Self::ber).
    pub fn ber_stderr(&self) -> f64 {
        let n = self.total_bits();
        if n == 0 {
            return 0.0;
        }
        let p = self.ber();
        libm::sqrt(p * (1.0 - p) / n as f64)
    }

    pub fn delay_count(&self) -> u64 {
        self.delay_histogram.iter().sum()
    }

    /// Mean buffer residence of delivered packets, in slots.
    pub fn avg_delay(&self) -> Option<f64> {
        let n = self.delay_count();
        if n == 0 {
            return None;
        }
        let total: u64 = self.delay_histogram.iter().enumerate().map(|(d, c)| d as u64 * c).sum();
        Some(total as f64 / n as f64)
    }

    pub fn min_delay(&self) -> Option<u64> {
        self.delay_histogram.iter().position(|&c| c > 0).map(|d| d as u64)
    }

    pub fn mmd_rate_ul(&self) -> f64 {
        ratio(self.recompute_ul, self.slots_total)
    }

    pub fn mmd_rate_dl(&self) -> f64 {
        ratio(self.recompute_dl, self.slots_total)
    }

    pub fn pep_samples(&self) -> Vec<f64> {
        let mut all = self.pep_ma.clone();
        all.extend_from_slice(&self.pep_bc);
        all
    }

    /// Mean theoretical PEP over every executed slot.
    pub fn pep_mean(&self) -> Option<f64> {
        mean_and_stderr(&self.pep_samples()).map(|(m, _)| m)
    }

    pub fn pep_stderr(&self) -> Option<f64> {
        mean_and_stderr(&self.pep_samples()).map(|(_, s)| s)
    }

    pub fn pep_mean_ma(&self) -> Option<f64> {
        mean_and_stderr(&self.pep_ma).map(|(m, _)| m)
    }

    pub fn pep_mean_bc(&self) -> Option<f64> {
        mean_and_stderr(&self.pep_bc).map(|(m, _)| m)
    }

    pub fn merge(&mut self, other: &RunStats) {
        for i in 0..2 {
            self.bit_errors[i] += other.bit_errors[i];
            self.bits_total[i] += other.bits_total[i];
        }
        if self.delay_histogram.len() < other.delay_histogram.len() {
            self.delay_histogram.resize(other.delay_histogram.len(), 0);
        }
        for (a, b) in self.delay_histogram.iter_mut().zip(&other.delay_histogram) {
            *a += b;
        }
        self.recompute_ul += other.recompute_ul;
        self.recompute_dl += other.recompute_dl;
        self.slots_total += other.slots_total;
        self.slots_ma += other.slots_ma;
        self.slots_bc += other.slots_bc;
        self.pep_ma.extend_from_slice(&other.pep_ma);
        self.pep_bc.extend_from_slice(&other.pep_bc);
        self.groups_delivered += other.groups_delivered;
        self.packets_delivered += other.packets_delivered;
        self.residual_packets += other.residual_packets;
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample(seed: u64) -> RunStats {
        let mut s = RunStats {
            bit_errors: [seed, 2 * seed],
            bits_total: [100, 100],
            slots_total: 10,
            slots_ma: 4,
            slots_bc: 6,
            recompute_ul: seed % 10,
            pep_ma: vec![0.1 / (seed + 1) as f64, 0.3],
            pep_bc: vec![1e-9 * seed as f64],
            ..RunStats::default()
        };
        s.record_delay(1 + seed % 3);
        s
    }

    #[test]
    fn derived_metrics() {
        let s = sample(3);
        assert_eq!(s.ber(), 9.0 / 200.0);
        assert_eq!(s.avg_delay(), Some(1.0));
        assert_eq!(s.mmd_rate_ul(), 0.3);
        assert_eq!(RunStats::default().avg_delay(), None);
    }

    #[test]
    fn merge_is_order_independent() {
        let parts: Vec<RunStats> = (0..5).map(sample).collect();
        let mut fwd = RunStats::default();
        parts.iter().for_each(|p| fwd.merge(p));
        let mut rev = RunStats::default();
        parts.iter().rev().for_each(|p| rev.merge(p));
        assert_eq!(fwd.ber(), rev.ber());
        assert_eq!(fwd.avg_delay(), rev.avg_delay());
        assert_eq!(fwd.pep_mean(), rev.pep_mean());
        assert_eq!(fwd.pep_stderr(), rev.pep_stderr());
        assert_eq!(fwd.delay_histogram, rev.delay_histogram);
        assert_eq!(fwd.slots_ma + fwd.slots_bc, fwd.slots_total);
    }
}
