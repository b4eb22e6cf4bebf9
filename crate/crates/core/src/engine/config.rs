use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{ChannelParams, CsiErrorParams, NetworkDims};
use crate::error::{invalid, Result};
use crate::selection::{bc_candidates, RecomputePolicy};
use crate::signal::Constellation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Modulation {
    #[default]
    Bpsk,
    Qpsk,
}

impl Modulation {
    pub fn constellation(&self) -> Constellation {
        match self {
            Modulation::Bpsk => Constellation::bpsk(),
            Modulation::Qpsk => Constellation::qpsk(),
        }
    }
}

/// Everything needed to simulate one SNR sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dims: NetworkDims,
    /// Buffer capacity `J` per cluster, in packets.
    pub buffer_capacity: usize,
    /// BC-forcing threshold `L`, in packet groups.
    pub l_threshold: usize,
    pub policy: RecomputePolicy,
    pub snr_db: Vec<f64>,
    /// Packet groups (`M_S` packets each) to deliver per SNR point.
    /// Defaults to `10000 M_S`.
    pub packet_groups: u64,
    /// Symbols per packet, `T`.
    pub symbols_per_packet: usize,
    pub modulation: Modulation,
    pub channel: ChannelParams,
    pub csi: CsiErrorParams,
    pub n0: f64,
    pub noise_enabled: bool,
    /// Independent channel draws used to warm up the `G` estimate.
    pub calibration_draws: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dims: NetworkDims {
                clusters: 5,
                relays: 10,
                ms: 2,
                u: 2,
                v: 2,
            },
            buffer_capacity: 6,
            l_threshold: 0,
            policy: RecomputePolicy::Drift { p: 0.2 },
            snr_db: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
            packet_groups: 20_000,
            symbols_per_packet: 100,
            modulation: Modulation::Bpsk,
            channel: ChannelParams::default(),
            csi: CsiErrorParams::PERFECT,
            n0: 1.0,
            noise_enabled: true,
            calibration_draws: 100,
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        let ms = self.dims.ms;
        if self.buffer_capacity == 0 || !self.buffer_capacity.is_multiple_of(ms) {
            return Err(invalid("J", "must be a positive multiple of Ms"));
        }
        if let RecomputePolicy::Drift { p } = self.policy {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid("p", "must lie in [0, 1]"));
            }
        }
        if self.snr_db.is_empty() {
            return Err(invalid("snr_db", "at least one SNR point is required"));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(invalid("snr_db", "SNR values must be finite"));
        }
        if self.packet_groups == 0 {
            return Err(invalid("packets", "must be positive"));
        }
        if self.symbols_per_packet == 0 {
            return Err(invalid("T", "must be positive"));
        }
        if !(self.n0 > 0.0) || !self.n0.is_finite() {
            return Err(invalid("n0", "must be positive and finite"));
        }
        if bc_candidates(self.dims.relays, self.dims.v).is_empty() {
            return Err(invalid("V", "a single relay with V = 1 has no downlink candidate"));
        }
        self.channel.validate()?;
        self.csi.validate()
    }

    /// `E / N_0` converted to the transmit energy `E`.
    pub fn energy(&self, snr_db: f64) -> f64 {
        self.n0 * libm::pow(10.0, snr_db / 10.0)
    }

    /// Slot-group capacity `Q = J / M_S`.
    pub fn group_capacity(&self) -> usize {
        self.buffer_capacity / self.dims.ms
    }

    pub fn protocol_label(&self) -> &'static str {
        match self.policy {
            RecomputePolicy::Drift { .. } => "chd-best-link",
            RecomputePolicy::Always => "mwc-best-user-link",
        }
    }

    /// Upper bound on slots before the loop is declared stalled.
    pub fn slot_budget(&self) -> u64 {
        self.packet_groups.saturating_mul(64).saturating_add(4096)
    }
}
