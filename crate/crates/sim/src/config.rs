//! Flat TOML experiment files.
//!
//! Every key is optional. `K`, `N`, `Ms`, `U`, `V`, `L`, `p` and `rho`
//! accept a scalar or a list; lists are swept as a cartesian product.
//! `snr_db` is the SNR grid of every combination.
//!
//! ```toml
//! protocol = "chd-best-link"   # or "mwc-best-user-link"
//! K = 5
//! N = 10
//! Ms = 2
//! p = [0.1, 0.2, 0.4, 0.8]
//! rho = 0.95
//! snr_db = [0, 2, 4, 6, 8, 10]
//! packets = 2000               # packet groups per SNR point
//! csi_beta = 0.5               # presence enables imperfect CSI
//! csi_alpha = 1.0
//!
//! [[distances]]                # per source-relay link, both directions
//! cluster = 0
//! side = 2
//! relay = 3
//! d = 1.5
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chd_core::channel::{ChannelParams, CsiErrorParams, Geometry, NetworkDims, Node, Side};
use chd_core::selection::RecomputePolicy;
use chd_core::{Modulation, SimConfig};
use serde::Deserialize;

use crate::SimError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistanceEntry {
    cluster: usize,
    side: u8,
    relay: usize,
    d: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    protocol: Option<String>,
    #[serde(rename = "K")]
    k: Option<OneOrMany<usize>>,
    #[serde(rename = "N")]
    n: Option<OneOrMany<usize>>,
    #[serde(rename = "Ms")]
    ms: Option<OneOrMany<usize>>,
    #[serde(rename = "U")]
    u: Option<OneOrMany<usize>>,
    #[serde(rename = "V")]
    v: Option<OneOrMany<usize>>,
    #[serde(rename = "J")]
    j: Option<usize>,
    #[serde(rename = "L")]
    l: Option<OneOrMany<usize>>,
    p: Option<OneOrMany<f64>>,
    rho: Option<OneOrMany<f64>>,
    #[serde(alias = "snr")]
    snr_db: Option<OneOrMany<f64>>,
    packets: Option<u64>,
    #[serde(rename = "T")]
    t: Option<usize>,
    modulation: Option<String>,
    gamma: Option<f64>,
    xi: Option<f64>,
    distance: Option<f64>,
    sigma2: Option<f64>,
    n0: Option<f64>,
    noise: Option<bool>,
    csi_beta: Option<f64>,
    csi_alpha: Option<f64>,
    calibration_draws: Option<usize>,
    seed: Option<u64>,
    replications: Option<u64>,
    out: Option<PathBuf>,
    distances: Option<Vec<DistanceEntry>>,
}

/// Values swept over. Each list is non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweeps {
    pub k: Vec<usize>,
    pub n: Vec<usize>,
    pub ms: Vec<usize>,
    pub u: Vec<usize>,
    pub v: Vec<usize>,
    pub l: Vec<usize>,
    pub p: Vec<f64>,
    pub rho: Vec<f64>,
}

impl Sweeps {
    fn single(cfg: &SimConfig) -> Self {
        let p = match cfg.policy {
            RecomputePolicy::Drift { p } => p,
            RecomputePolicy::Always => 0.0,
        };
        Self {
            k: vec![cfg.dims.clusters],
            n: vec![cfg.dims.relays],
            ms: vec![cfg.dims.ms],
            u: vec![cfg.dims.u],
            v: vec![cfg.dims.v],
            l: vec![cfg.l_threshold],
            p: vec![p],
            rho: vec![cfg.channel.rho],
        }
    }

    pub fn combinations(&self) -> usize {
        [&self.k, &self.n, &self.ms, &self.u, &self.v, &self.l]
            .iter()
            .map(|v| v.len())
            .product::<usize>()
            * self.p.len()
            * self.rho.len()
    }
}

/// A validated experiment: a base configuration plus sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SimConfig,
    pub sweeps: Sweeps,
    /// Packet groups per SNR point; `None` means `10000 M_S` per combination.
    pub packets: Option<u64>,
    pub replications: u64,
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Single-combination spec around `base`.
    pub fn from_config(base: SimConfig) -> Self {
        let sweeps = Sweeps::single(&base);
        Self {
            packets: Some(base.packet_groups),
            base,
            sweeps,
            replications: 1,
            out: None,
        }
    }

    /// Every sweep combination in row order: `K`, `N`, `Ms`, `U`, `V`, `L`,
    /// `p`, `rho`, last key fastest.
    pub fn configs(&self) -> Vec<SimConfig> {
        let s = &self.sweeps;
        let mut out = Vec::with_capacity(s.combinations());
        for &k in &s.k {
            for &n in &s.n {
                for &ms in &s.ms {
                    for &u in &s.u {
                        for &v in &s.v {
                            for &l in &s.l {
                                for &p in &s.p {
                                    for &rho in &s.rho {
                                        let mut c = self.base.clone();
                                        c.dims = NetworkDims {
                                            clusters: k,
                                            relays: n,
                                            ms,
                                            u,
                                            v,
                                        };
                                        c.l_threshold = l;
                                        if let RecomputePolicy::Drift { .. } = c.policy {
                                            c.policy = RecomputePolicy::Drift { p };
                                        }
                                        c.channel.rho = rho;
                                        c.packet_groups = self.packets.unwrap_or(10_000 * ms as u64);
                                        out.push(c);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Checks every combination, reporting all failures at once.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.replications == 0 {
            return Err(SimError::Config("replications: must be positive".into()));
        }
        let problems: Vec<String> = self
            .configs()
            .iter()
            .filter_map(|c| c.validate().err().map(|e| format!("{}: {e}", describe(c))))
            .collect();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SimError::Config(problems.join("\n")))
        }
    }
}

fn describe(c: &SimConfig) -> String {
    let d = &c.dims;
    format!(
        "K={} N={} Ms={} U={} V={} J={} L={}",
        d.clusters, d.relays, d.ms, d.u, d.v, c.buffer_capacity, c.l_threshold
    )
}

fn nonempty<T: Clone>(name: &str, v: Option<OneOrMany<T>>, default: T) -> Result<Vec<T>, SimError> {
    let v = v.map_or_else(|| vec![default], OneOrMany::into_vec);
    if v.is_empty() {
        return Err(SimError::Config(format!("{name}: list must not be empty")));
    }
    Ok(v)
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentSpec, SimError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
    let d = SimConfig::default();
    let d_p = match d.policy {
        RecomputePolicy::Drift { p } => p,
        RecomputePolicy::Always => 0.0,
    };

    let policy = match raw.protocol.as_deref().unwrap_or("chd-best-link") {
        "chd-best-link" => RecomputePolicy::Drift { p: d_p },
        "mwc-best-user-link" => RecomputePolicy::Always,
        other => return Err(SimError::Config(format!("protocol: unknown protocol `{other}`"))),
    };
    let modulation = match raw.modulation.as_deref().unwrap_or("bpsk") {
        "bpsk" => Modulation::Bpsk,
        "qpsk" => Modulation::Qpsk,
        other => return Err(SimError::Config(format!("modulation: unknown modulation `{other}`"))),
    };
    let csi = match (raw.csi_beta, raw.csi_alpha) {
        (None, None) => CsiErrorParams::PERFECT,
        (Some(beta), alpha) => {
            CsiErrorParams::new(beta, alpha.unwrap_or(1.0)).map_err(|e| SimError::Config(e.to_string()))?
        }
        (None, Some(_)) => return Err(SimError::Config("csi_alpha: requires csi_beta".into())),
    };

    let mut overrides = BTreeMap::new();
    for e in raw.distances.unwrap_or_default() {
        let side = match e.side {
            1 => Side::S1,
            2 => Side::S2,
            s => return Err(SimError::Config(format!("distances: side must be 1 or 2, got {s}"))),
        };
        let src = Node::Source {
            cluster: e.cluster,
            side,
        };
        let relay = Node::Relay(e.relay);
        overrides.insert((src, relay), e.d);
        overrides.insert((relay, src), e.d);
    }
    let channel = ChannelParams {
        gamma: raw.gamma.unwrap_or(1.0),
        xi: raw.xi.unwrap_or(1.0),
        distances: Geometry {
            default: raw.distance.unwrap_or(1.0),
            overrides,
        },
        rho: 0.0,
        sigma2: raw.sigma2.unwrap_or(1.0),
    };

    let sweeps = Sweeps {
        k: nonempty("K", raw.k, d.dims.clusters)?,
        n: nonempty("N", raw.n, d.dims.relays)?,
        ms: nonempty("Ms", raw.ms, d.dims.ms)?,
        u: nonempty("U", raw.u, d.dims.u)?,
        v: nonempty("V", raw.v, d.dims.v)?,
        l: nonempty("L", raw.l, d.l_threshold)?,
        p: nonempty("p", raw.p, d_p)?,
        rho: nonempty("rho", raw.rho, d.channel.rho)?,
    };
    let snr_db = raw.snr_db.map_or_else(|| d.snr_db.clone(), OneOrMany::into_vec);

    let base = SimConfig {
        dims: d.dims,
        buffer_capacity: raw.j.unwrap_or(d.buffer_capacity),
        l_threshold: d.l_threshold,
        policy,
        snr_db,
        packet_groups: d.packet_groups,
        symbols_per_packet: raw.t.unwrap_or(d.symbols_per_packet),
        modulation,
        channel,
        csi,
        n0: raw.n0.unwrap_or(d.n0),
        noise_enabled: raw.noise.unwrap_or(true),
        calibration_draws: raw.calibration_draws.unwrap_or(d.calibration_draws),
        seed: raw.seed.unwrap_or(d.seed),
    };
    let spec = ExperimentSpec {
        base,
        sweeps,
        packets: raw.packets,
        replications: raw.replications.unwrap_or(1),
        out: raw.out,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn load_config(path: &Path) -> Result<ExperimentSpec, SimError> {
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text).map_err(|e| match e {
        SimError::Config(msg) => SimError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
