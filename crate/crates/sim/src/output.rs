//! CSV result rows and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use chd_core::selection::RecomputePolicy;
use chd_core::{RunStats, SimConfig};
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::SimError;

/// One CSV record: one (combination, SNR, replication) cell.
///
/// Empty optional fields mean "no samples" (no delivered packet, no slot of
/// that mode) or, for `p`, a protocol without a drift threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub protocol: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Ms")]
    pub ms: usize,
    #[serde(rename = "U")]
    pub u: usize,
    #[serde(rename = "V")]
    pub v: usize,
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub p: Option<f64>,
    pub rho: f64,
    pub csi_enabled: bool,
    pub csi_beta: f64,
    pub csi_alpha: f64,
    pub snr_db: f64,
    pub ber: f64,
    pub ber_stderr: f64,
    pub avg_delay_slots: Option<f64>,
    pub mmd_rate_ul: f64,
    pub mmd_rate_dl: f64,
    pub pep_theory_mean: Option<f64>,
    pub pep_theory_stderr: Option<f64>,
    pub pep_theory_ma: Option<f64>,
    pub pep_theory_bc: Option<f64>,
    pub slots_total: u64,
    pub slots_ma: u64,
    pub slots_bc: u64,
    pub packets_delivered: u64,
    pub residual_packets: u64,
    pub seed: u64,
    pub replication: u64,
}

impl ResultRow {
    pub fn new(cfg: &SimConfig, snr_db: f64, replication: u64, stats: &RunStats) -> Self {
        let d = &cfg.dims;
        Self {
            protocol: cfg.protocol_label().to_string(),
            k: d.clusters,
            n: d.relays,
            ms: d.ms,
            u: d.u,
            v: d.v,
            j: cfg.buffer_capacity,
            l: cfg.l_threshold,
            p: match cfg.policy {
                RecomputePolicy::Drift { p } => Some(p),
                RecomputePolicy::Always => None,
            },
            rho: cfg.channel.rho,
            csi_enabled: !cfg.csi.is_perfect(),
            csi_beta: cfg.csi.beta,
            csi_alpha: cfg.csi.alpha,
            snr_db,
            ber: stats.ber(),
            ber_stderr: stats.ber_stderr(),
            avg_delay_slots: stats.avg_delay(),
            mmd_rate_ul: stats.mmd_rate_ul(),
            mmd_rate_dl: stats.mmd_rate_dl(),
            pep_theory_mean: stats.pep_mean(),
            pep_theory_stderr: stats.pep_stderr(),
            pep_theory_ma: stats.pep_mean_ma(),
            pep_theory_bc: stats.pep_mean_bc(),
            slots_total: stats.slots_total,
            slots_ma: stats.slots_ma,
            slots_bc: stats.slots_bc,
            packets_delivered: stats.packets_delivered,
            residual_packets: stats.residual_packets,
            seed: cfg.seed,
            replication,
        }
    }
}

pub fn write_rows<W: Write>(w: W, rows: &[ResultRow]) -> Result<(), SimError> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(r: R) -> Result<Vec<ResultRow>, SimError> {
    let mut rdr = csv::Reader::from_reader(r);
    Ok(rdr.deserialize().collect::<Result<Vec<ResultRow>, _>>()?)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, SimError> {
    let f = std::fs::File::open(path).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_rows(f)
}

/// Output file staged in its target directory and renamed into place on
/// [`commit`](Self::commit). Dropping it uncommitted leaves nothing behind.
pub struct PendingOutput {
    path: PathBuf,
    tmp: NamedTempFile,
}

impl PendingOutput {
    pub fn create(path: &Path) -> Result<Self, SimError> {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let tmp = NamedTempFile::new_in(dir).map_err(|source| SimError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self {
            path: path.to_path_buf(),
            tmp,
        })
    }

    pub fn commit(mut self, rows: &[ResultRow]) -> Result<(), SimError> {
        write_rows(self.tmp.as_file_mut(), rows)?;
        self.tmp.as_file().sync_all().map_err(|source| SimError::Io {
            path: self.path.clone(),
            source,
        })?;
        self.tmp.persist(&self.path).map_err(|e| SimError::Io {
            path: self.path.clone(),
            source: e.error,
        })?;
        Ok(())
    }
}

/// Writes `rows` to `path` atomically.
pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<(), SimError> {
    PendingOutput::create(path)?.commit(rows)
}
