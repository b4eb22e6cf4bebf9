//! Slot-level protocol loop.

mod config;
mod pep;
mod stats;

pub use config::{Modulation, SimConfig};
pub use pep::{min_distance, pep_from_distance, q_function, theoretical_pep};
pub use stats::RunStats;

use alloc::vec::Vec;

use crate::buffers::{BufferBank, BufferedPacket};
use crate::channel::{slot_channels, ChannelSet, LinkMatrices, Side};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, tag, StreamRng};
use crate::selection::{
    combined_downlink, BcCandidate, DifferenceSet, Mode, Refresh, SelectionDecision, Selector, Transmission,
};
use crate::signal::{
    downlink_gain, synthesize_downlink, synthesize_uplink, uplink_gain, xor_combine, xor_recover, BitBlock,
    Constellation, EnergyBudget, MlDetector, NoiseParams,
};

/// What happened in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome {
    pub slot: u64,
    pub decision: SelectionDecision,
    pub refresh: Refresh,
    /// Bit errors per direction, BC slots only.
    pub bit_errors: [u64; 2],
    /// Theoretical PEP of the channel actually used.
    pub pep: f64,
}

/// Simulation state of one SNR point.
pub struct Engine {
    cfg: SimConfig,
    es: f64,
    seed: u64,
    alphabet: Constellation,
    noise: NoiseParams,
    up_diffs: DifferenceSet,
    down_diffs: DifferenceSet,
    channels: Option<ChannelSet>,
    buffers: BufferBank,
    selector: Selector,
    stats: RunStats,
    next_slot: u64,
}

/// Sub-seed of one cell. Independent of the SNR point, so every point of a
/// sweep sees the same channel, traffic and noise realisations.
pub fn cell_seed(master: u64, replication: u64) -> u64 {
    derive_seed(master, &[tag::CELL, replication])
}

impl Engine {
    /// Fresh state at `snr_db`, seeded with `seed` (usually a
    /// [`cell_seed`]). Runs the calibration warm-up.
    pub fn new(cfg: &SimConfig, snr_db: f64, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let ms = cfg.dims.ms;
        let es = cfg.energy(snr_db);
        let alphabet = cfg.modulation.constellation();
        let noise = if cfg.noise_enabled {
            NoiseParams::new(cfg.n0)?
        } else {
            NoiseParams::disabled(cfg.n0)?
        };
        let mut selector = Selector::new(cfg.policy, es, ms, &alphabet)?;
        for i in 0..cfg.calibration_draws as u64 {
            let set = slot_channels(None, &cfg.dims, &cfg.channel, derive_seed(seed, &[tag::CALIBRATION, i]))?;
            let view = set
                .links()
                .csi_view(&cfg.csi, es, derive_seed(seed, &[tag::CALIBRATION, tag::CSI, i]))?;
            selector.calibrate(&view)?;
        }
        Ok(Self {
            es,
            seed,
            noise,
            up_diffs: DifferenceSet::new(&alphabet, 2 * ms),
            down_diffs: DifferenceSet::new(&alphabet, ms),
            alphabet,
            channels: None,
            buffers: BufferBank::new(cfg.dims.clusters, cfg.buffer_capacity, ms)?,
            selector,
            stats: RunStats::default(),
            next_slot: 0,
            cfg: cfg.clone(),
        })
    }

    pub fn energy(&self) -> f64 {
        self.es
    }

    pub fn buffers(&self) -> &BufferBank {
        &self.buffers
    }

    pub fn selector(&self) -> &Selector {
        &self.selector
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    /// Channels of the last executed slot.
    pub fn channels(&self) -> Option<&ChannelSet> {
        self.channels.as_ref()
    }

    /// Advances the channel, refreshes selection, executes the chosen mode.
    pub fn run_slot(&mut self) -> Result<SlotOutcome> {
        let slot = self.next_slot;
        let set = slot_channels(
            self.channels.as_ref(),
            &self.cfg.dims,
            &self.cfg.channel,
            derive_seed(self.seed, &[tag::CHANNEL, slot]),
        )?;
        let view = set
            .links()
            .csi_view(&self.cfg.csi, self.es, derive_seed(self.seed, &[tag::CSI, slot]))?;
        let refresh = self.selector.refresh(&view)?;
        let decision = self
            .selector
            .decide(&self.buffers.summary(), self.cfg.l_threshold, self.cfg.dims.ms)?;

        let mut traffic = stream(self.seed, &[tag::TRAFFIC, slot]);
        let mut noise_rng = stream(self.seed, &[tag::NOISE, slot]);
        let (bit_errors, pep) = match decision.transmission {
            Transmission::Ma { relay } => {
                let pep = self.run_ma(&set, &view, decision.cluster, relay, slot, &mut traffic, &mut noise_rng)?;
                self.stats.slots_ma += 1;
                self.stats.pep_ma.push(pep);
                ([0, 0], pep)
            }
            Transmission::Bc { set: rs, pair } => {
                let cand = BcCandidate { set: rs, pair };
                let (errors, pep) = self.run_bc(&set, &view, decision.cluster, &cand, slot, &mut noise_rng)?;
                self.stats.slots_bc += 1;
                self.stats.pep_bc.push(pep);
                (errors, pep)
            }
        };

        self.stats.slots_total += 1;
        self.stats.recompute_ul = self.selector.state().recompute_ul;
        self.stats.recompute_dl = self.selector.state().recompute_dl;
        self.stats.residual_packets = self.buffers.total() as u64;
        self.channels = Some(set);
        self.next_slot += 1;
        Ok(SlotOutcome {
            slot,
            decision,
            refresh,
            bit_errors,
            pep,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn run_ma(
        &mut self,
        set: &ChannelSet,
        view: &LinkMatrices,
        cluster: usize,
        relay: usize,
        slot: u64,
        traffic: &mut StreamRng,
        noise_rng: &mut StreamRng,
    ) -> Result<f64> {
        let ms = self.cfg.dims.ms;
        let b = self.alphabet.bits_per_symbol();
        let len = self.cfg.symbols_per_packet * b;
        let h_true = set.links().uplink(cluster, relay);
        let det = MlDetector::new(view.uplink(cluster, relay), uplink_gain(self.es, ms), &self.alphabet);

        let x1 = BitBlock::random(ms, len, traffic)?;
        let x2 = BitBlock::random(ms, len, traffic)?;
        let mut x1_hat = BitBlock::zeros(ms, len)?;
        let mut x2_hat = BitBlock::zeros(ms, len)?;
        for t in 0..self.cfg.symbols_per_packet {
            let mut bits = x1.column_bits(t * b, b);
            bits.extend(x2.column_bits(t * b, b));
            let x = self.alphabet.modulate(&bits)?;
            let y = synthesize_uplink(&x, h_true, self.es, ms, &self.noise, noise_rng)?;
            let labels = self.alphabet.candidate_labels(det.detect_index(&y)?, 2 * ms);
            for (entry, label) in labels.into_iter().enumerate() {
                let (target, stream_idx) = if entry < ms {
                    (&mut x1_hat, entry)
                } else {
                    (&mut x2_hat, entry - ms)
                };
                for j in 0..b {
                    target.set(stream_idx, t * b + j, ((label >> (b - 1 - j)) & 1) as u8);
                }
            }
        }

        let z = xor_combine(&x1_hat, &x2_hat)?;
        let group = (0..ms)
            .map(|m| {
                Ok(BufferedPacket::new(
                    BitBlock::new(1, len, z.row(m).to_vec())?,
                    BitBlock::new(1, len, x1.row(m).to_vec())?,
                    BitBlock::new(1, len, x2.row(m).to_vec())?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        self.buffers.store(cluster, group, slot)?;

        let d = min_distance(h_true, Mode::Ma, &self.up_diffs);
        Ok(pep_from_distance(d, self.es, ms, self.noise.n0()))
    }

    fn run_bc(
        &mut self,
        set: &ChannelSet,
        view: &LinkMatrices,
        cluster: usize,
        cand: &BcCandidate,
        slot: u64,
        noise_rng: &mut StreamRng,
    ) -> Result<([u64; 2], f64)> {
        let ms = self.cfg.dims.ms;
        let b = self.alphabet.bits_per_symbol();
        let (packets, delays) = self.buffers.extract(cluster, slot)?;
        let z = BitBlock::from_rows(packets.iter().map(|p| p.payload.row(0)))?;
        let x1 = BitBlock::from_rows(packets.iter().map(|p| p.truth_x1.row(0)))?;
        let x2 = BitBlock::from_rows(packets.iter().map(|p| p.truth_x2.row(0)))?;
        let len = z.len();
        let energy = EnergyBudget::symmetric(self.es);

        let mut h_true = Vec::with_capacity(2);
        let mut dets = Vec::with_capacity(2);
        for side in Side::BOTH {
            h_true.push(combined_downlink(set.links(), cluster, side, cand)?);
            let h_hat = combined_downlink(view, cluster, side, cand)?;
            dets.push(MlDetector::new(&h_hat, downlink_gain(energy.relay, ms), &self.alphabet));
        }

        let mut z_hat = [BitBlock::zeros(ms, len)?, BitBlock::zeros(ms, len)?];
        for t in 0..len / b {
            let zs = self.alphabet.modulate(&z.column_bits(t * b, b))?;
            for side in Side::BOTH {
                let i = side.index();
                let y = synthesize_downlink(&zs, &h_true[i], &energy, ms, &self.noise, noise_rng)?;
                let labels = self.alphabet.candidate_labels(dets[i].detect_index(&y)?, ms);
                for (m, label) in labels.into_iter().enumerate() {
                    for j in 0..b {
                        z_hat[i].set(m, t * b + j, ((label >> (b - 1 - j)) & 1) as u8);
                    }
                }
            }
        }

        // S1 recovers x2 with its own x1; S2 recovers x1 with its own x2.
        let x2_hat = xor_recover(&x1, &z_hat[0])?;
        let x1_hat = xor_recover(&x2, &z_hat[1])?;
        let errors = [x2_hat.hamming(&x2)?, x1_hat.hamming(&x1)?];
        let bits = (ms * len) as u64;
        for (acc, e) in self.stats.bit_errors.iter_mut().zip(errors) {
            *acc += e;
        }
        for acc in &mut self.stats.bits_total {
            *acc += bits;
        }
        for d in &delays {
            self.stats.record_delay(*d);
        }
        self.stats.groups_delivered += 1;
        self.stats.packets_delivered += packets.len() as u64;

        let d = h_true
            .iter()
            .map(|h| min_distance(h, Mode::Bc, &self.down_diffs))
            .fold(f64::INFINITY, f64::min);
        Ok((errors, pep_from_distance(d, self.es, ms, self.noise.n0())))
    }

    /// Runs until `cfg.packet_groups` groups have been delivered.
    pub fn run_to_completion(mut self) -> Result<RunStats> {
        let budget = self.cfg.slot_budget();
        while self.stats.groups_delivered < self.cfg.packet_groups {
            if self.stats.slots_total >= budget {
                return Err(Error::Stalled {
                    slots: self.stats.slots_total,
                    delivered: self.stats.groups_delivered,
                    target: self.cfg.packet_groups,
                });
            }
            self.run_slot()?;
        }
        Ok(self.stats)
    }
}

/// One cell: the SNR point at `snr_index` with replication `replication`.
pub fn run_point(cfg: &SimConfig, snr_index: usize, replication: u64) -> Result<RunStats> {
    let snr = *cfg.snr_db.get(snr_index).ok_or(Error::DimensionMismatch {
        expected: cfg.snr_db.len(),
        actual: snr_index,
    })?;
    Engine::new(cfg, snr, cell_seed(cfg.seed, replication))?.run_to_completion()
}

/// Every SNR point of `cfg`, sequentially, replication 0.
pub fn run_experiment(cfg: &SimConfig) -> Result<Vec<RunStats>> {
    (0..cfg.snr_db.len()).map(|i| run_point(cfg, i, 0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::NetworkDims;
    use crate::selection::RecomputePolicy;
    use alloc::vec;

    fn small() -> SimConfig {
        SimConfig {
            dims: NetworkDims {
                clusters: 2,
                relays: 2,
                ms: 1,
                u: 1,
                v: 2,
            },
            buffer_capacity: 2,
            packet_groups: 30,
            symbols_per_packet: 8,
            snr_db: vec![10.0],
            calibration_draws: 10,
            ..SimConfig::default()
        }
    }

    #[test]
    fn completes_and_conserves_packets() {
        let cfg = small();
        let stats = run_point(&cfg, 0, 0).unwrap();
        assert_eq!(stats.groups_delivered, 30);
        assert_eq!(stats.slots_ma + stats.slots_bc, stats.slots_total);
        assert_eq!(
            stats.slots_ma * cfg.dims.ms as u64,
            stats.packets_delivered + stats.residual_packets
        );
        assert_eq!(stats.pep_ma.len() as u64 + stats.pep_bc.len() as u64, stats.slots_total);
    }

    #[test]
    fn replays_exactly() {
        let cfg = small();
        assert_eq!(run_point(&cfg, 0, 3).unwrap(), run_point(&cfg, 0, 3).unwrap());
        assert_ne!(run_point(&cfg, 0, 3).unwrap(), run_point(&cfg, 0, 4).unwrap());
    }

    #[test]
    fn noiseless_perfect_csi_is_error_free() {
        let cfg = SimConfig {
            noise_enabled: false,
            ..small()
        };
        let stats = run_point(&cfg, 0, 0).unwrap();
        assert_eq!(stats.total_bit_errors(), 0);
        assert!(stats.total_bits() > 0);
    }

    #[test]
    fn zero_threshold_forces_immediate_delivery() {
        let cfg = SimConfig {
            l_threshold: 0,
            ..small()
        };
        let stats = run_point(&cfg, 0, 0).unwrap();
        assert_eq!(stats.min_delay(), Some(1));
        assert_eq!(stats.avg_delay(), Some(1.0));
    }

    #[test]
    fn always_policy_recomputes_every_slot() {
        let cfg = SimConfig {
            policy: RecomputePolicy::Always,
            ..small()
        };
        let stats = run_point(&cfg, 0, 0).unwrap();
        assert_eq!(stats.mmd_rate_ul(), 1.0);
        assert_eq!(stats.mmd_rate_dl(), 1.0);
    }

    #[test]
    fn qpsk_runs() {
        let cfg = SimConfig {
            modulation: Modulation::Qpsk,
            noise_enabled: false,
            ..small()
        };
        let stats = run_point(&cfg, 0, 0).unwrap();
        assert_eq!(stats.total_bit_errors(), 0);
    }
}
