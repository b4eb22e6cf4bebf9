//! Channel generation: i.i.d. Rayleigh draws, Gauss-Markov evolution,
//! large-scale path loss and imperfect-CSI views.
//!
//! Every link keeps its unscaled small-scale matrix `G`; evolution acts on
//! `G` and the path-loss scale is reapplied afterwards, so
//! `||H||^2 = gamma * d^(-2 xi) * ||G||^2` holds in every slot.

mod matrix;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

pub use matrix::ChannelMatrix;

use crate::error::{invalid, Error, Result};
use crate::rng::{self, complex_gaussian};

/// One of the two source UAVs in a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    S1,
    S2,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::S1, Side::S2];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Side::S1 => 0,
            Side::S2 => 1,
        }
    }
}

/// A node of the network, zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Source { cluster: usize, side: Side },
    Relay(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Uplink,
    Downlink,
}

/// Identifies one matrix of a [`ChannelSet`]. `side` is `None` for uplink
/// matrices, which carry both sources of the cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId {
    pub direction: Direction,
    pub cluster: usize,
    pub relay: usize,
    pub side: Option<Side>,
}

/// Antenna and population sizes shared by every component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkDims {
    /// Clusters (source pairs), `K`.
    pub clusters: usize,
    /// Relays, `N`.
    pub relays: usize,
    /// Antennas per source, `M_S`.
    pub ms: usize,
    /// Relay receive-block factor; each relay has `2 U M_S` antennas.
    pub u: usize,
    /// Relay transmit-subset factor; `V M_S <= 2 U M_S`.
    pub v: usize,
}

impl NetworkDims {
    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 {
            return Err(invalid("K", "must be positive"));
        }
        if self.relays == 0 {
            return Err(invalid("N", "must be positive"));
        }
        if self.ms == 0 {
            return Err(invalid("Ms", "must be positive"));
        }
        if self.u == 0 {
            return Err(invalid("U", "must be positive"));
        }
        if self.v == 0 {
            return Err(invalid("V", "must be positive"));
        }
        if self.v > 2 * self.u {
            return Err(invalid("V", "V*Ms must not exceed the 2*U*Ms relay antennas"));
        }
        Ok(())
    }

    pub fn uplink_shape(&self) -> (usize, usize) {
        (2 * self.u * self.ms, 2 * self.ms)
    }

    pub fn downlink_shape(&self) -> (usize, usize) {
        (self.ms, self.v * self.ms)
    }

    pub fn uplink_count(&self) -> usize {
        self.clusters * self.relays
    }

    pub fn downlink_count(&self) -> usize {
        2 * self.clusters * self.relays
    }

    #[inline]
    fn uplink_index(&self, cluster: usize, relay: usize) -> usize {
        cluster * self.relays + relay
    }

    #[inline]
    fn downlink_index(&self, relay: usize, side: Side, cluster: usize) -> usize {
        (cluster * self.relays + relay) * 2 + side.index()
    }

    /// All links in storage order: uplinks first, then downlinks.
    pub fn links(&self) -> impl Iterator<Item = LinkId> + '_ {
        let up = (0..self.clusters).flat_map(move |k| {
            (0..self.relays).map(move |n| LinkId {
                direction: Direction::Uplink,
                cluster: k,
                relay: n,
                side: None,
            })
        });
        let down = (0..self.clusters).flat_map(move |k| {
            (0..self.relays).flat_map(move |n| {
                Side::BOTH.into_iter().map(move |s| LinkId {
                    direction: Direction::Downlink,
                    cluster: k,
                    relay: n,
                    side: Some(s),
                })
            })
        });
        up.chain(down)
    }
}

/// Link distances: a homogeneous default with per-directed-link overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub default: f64,
    pub overrides: BTreeMap<(Node, Node), f64>,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            default: 1.0,
            overrides: BTreeMap::new(),
        }
    }
}

impl Geometry {
    pub fn homogeneous(d: f64) -> Self {
        Self {
            default: d,
            overrides: BTreeMap::new(),
        }
    }

    pub fn distance(&self, from: Node, to: Node) -> f64 {
        self.overrides.get(&(from, to)).copied().unwrap_or(self.default)
    }
}

/// Large-scale and temporal parameters of every link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub gamma: f64,
    pub xi: f64,
    pub distances: Geometry,
    pub rho: f64,
    pub sigma2: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            xi: 1.0,
            distances: Geometry::default(),
            rho: 0.0,
            sigma2: 1.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(invalid("gamma", "must be positive and finite"));
        }
        if !self.xi.is_finite() {
            return Err(invalid("xi", "must be finite"));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(invalid("rho", "must lie in [-1, 1]"));
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return Err(invalid("sigma2", "must be positive and finite"));
        }
        let all_positive = core::iter::once(self.distances.default)
            .chain(self.distances.overrides.values().copied())
            .all(|d| d > 0.0 && d.is_finite());
        if !all_positive {
            return Err(invalid("distance", "all distances must be positive and finite"));
        }
        Ok(())
    }

    /// Entry scale `sqrt(gamma) * d^(-xi)`.
    pub fn path_gain(&self, from: Node, to: Node) -> f64 {
        libm::sqrt(self.gamma) * libm::pow(self.distances.distance(from, to), -self.xi)
    }
}

/// Imperfect-CSI model: `H_hat = H + H_e`, with i.i.d. error variance
/// `beta * E^(-alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiErrorParams {
    pub beta: f64,
    pub alpha: f64,
    pub enabled: bool,
}

impl CsiErrorParams {
    pub const PERFECT: Self = Self {
        beta: 0.0,
        alpha: 0.0,
        enabled: false,
    };

    pub fn new(beta: f64, alpha: f64) -> Result<Self> {
        let p = Self {
            beta,
            alpha,
            enabled: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(invalid("beta", "must be nonnegative and finite"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(invalid("alpha", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn is_perfect(&self) -> bool {
        !self.enabled || self.beta == 0.0
    }

    /// Per-entry error variance at energy `energy`.
    pub fn error_variance(&self, energy: f64) -> f64 {
        if self.is_perfect() {
            0.0
        } else {
            self.beta * libm::pow(energy, -self.alpha)
        }
    }
}

/// Matrix with i.i.d. `CN(0, sigma2)` entries.
pub fn draw_iid<R: Rng + ?Sized>(rows: usize, cols: usize, sigma2: f64, rng: &mut R) -> Result<ChannelMatrix> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(invalid("sigma2", "must be positive and finite"));
    }
    let mut m = ChannelMatrix::zeros(rows, cols)?;
    for z in m.entries_mut() {
        *z = complex_gaussian(rng, sigma2);
    }
    Ok(m)
}

/// First-order Gauss-Markov step `rho * prev + sqrt(1 - rho^2) * fresh`,
/// with `fresh` drawn i.i.d. `CN(0, sigma2)`.
pub fn evolve<R: Rng + ?Sized>(prev: &ChannelMatrix, rho: f64, sigma2: f64, rng: &mut R) -> Result<ChannelMatrix> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(invalid("rho", "must lie in [-1, 1]"));
    }
    let innovation = libm::sqrt(1.0 - rho * rho);
    if innovation == 0.0 {
        return Ok(prev.scaled(rho));
    }
    let fresh = draw_iid(prev.rows(), prev.cols(), sigma2, rng)?;
    let mut out = prev.scaled(rho);
    for (o, f) in out.entries_mut().iter_mut().zip(fresh.entries()) {
        *o += f * innovation;
    }
    Ok(out)
}

/// Scales every entry by `sqrt(gamma) * d^(-xi)`.
pub fn apply_path_loss(m: &ChannelMatrix, gamma: f64, xi: f64, d: f64) -> Result<ChannelMatrix> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    if !(d > 0.0) {
        return Err(invalid("distance", "must be positive"));
    }
    Ok(m.scaled(libm::sqrt(gamma) * libm::pow(d, -xi)))
}

/// Adds an independent CSI error drawn at energy `energy`.
pub fn corrupt_csi<R: Rng + ?Sized>(
    m: &ChannelMatrix,
    err: &CsiErrorParams,
    energy: f64,
    rng: &mut R,
) -> Result<ChannelMatrix> {
    err.validate()?;
    if !(energy > 0.0) {
        return Err(invalid("energy", "must be positive"));
    }
    if err.is_perfect() {
        return Ok(m.clone());
    }
    let var = err.error_variance(energy);
    let mut out = m.clone();
    for z in out.entries_mut() {
        *z += complex_gaussian(rng, var);
    }
    Ok(out)
}

/// The per-link matrices of one slot, in one view (small-scale, true or
/// estimated).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMatrices {
    dims: NetworkDims,
    uplink: Vec<ChannelMatrix>,
    downlink: Vec<ChannelMatrix>,
}

impl LinkMatrices {
    /// Builds a view from matrices in [`NetworkDims::links`] order.
    pub fn from_links(dims: NetworkDims, mut make: impl FnMut(LinkId) -> Result<ChannelMatrix>) -> Result<Self> {
        dims.validate()?;
        let mut uplink = Vec::with_capacity(dims.uplink_count());
        let mut downlink = Vec::with_capacity(dims.downlink_count());
        let (ur, uc) = dims.uplink_shape();
        let (dr, dc) = dims.downlink_shape();
        for link in dims.links() {
            let m = make(link)?;
            let (er, ec, dst) = match link.direction {
                Direction::Uplink => (ur, uc, &mut uplink),
                Direction::Downlink => (dr, dc, &mut downlink),
            };
            if m.rows() != er {
                return Err(Error::DimensionMismatch {
                    expected: er,
                    actual: m.rows(),
                });
            }
            if m.cols() != ec {
                return Err(Error::DimensionMismatch {
                    expected: ec,
                    actual: m.cols(),
                });
            }
            dst.push(m);
        }
        Ok(Self { dims, uplink, downlink })
    }

    pub fn dims(&self) -> &NetworkDims {
        &self.dims
    }

    /// `H_{S_k, R_n}`: `2 U M_S x 2 M_S`, columns `[S1 | S2]`.
    #[inline]
    pub fn uplink(&self, cluster: usize, relay: usize) -> &ChannelMatrix {
        &self.uplink[self.dims.uplink_index(cluster, relay)]
    }

    /// `H_{R_n, S_side}` of cluster `k`: `M_S x V M_S`, one `M_S x M_S`
    /// block per transmit subset.
    #[inline]
    pub fn downlink(&self, relay: usize, side: Side, cluster: usize) -> &ChannelMatrix {
        &self.downlink[self.dims.downlink_index(relay, side, cluster)]
    }

    pub fn get(&self, link: LinkId) -> &ChannelMatrix {
        match (link.direction, link.side) {
            (Direction::Uplink, _) => self.uplink(link.cluster, link.relay),
            (Direction::Downlink, Some(s)) => self.downlink(link.relay, s, link.cluster),
            (Direction::Downlink, None) => self.downlink(link.relay, Side::S1, link.cluster),
        }
    }

    pub fn uplink_matrices(&self) -> &[ChannelMatrix] {
        &self.uplink
    }

    pub fn downlink_matrices(&self) -> &[ChannelMatrix] {
        &self.downlink
    }

    /// Estimated view: every uplink corrupted at `E = E_S`, every downlink
    /// at `E = E_S / 2`. Errors are redrawn from `stream_seed`.
    pub fn csi_view(&self, err: &CsiErrorParams, es: f64, stream_seed: u64) -> Result<Self> {
        if err.is_perfect() {
            return Ok(self.clone());
        }
        Self::from_links(self.dims, |link| {
            let mut r = rng::stream(stream_seed, &link_tags(link));
            let energy = match link.direction {
                Direction::Uplink => es,
                Direction::Downlink => es / 2.0,
            };
            corrupt_csi(self.get(link), err, energy, &mut r)
        })
    }
}

fn link_tags(link: LinkId) -> [u64; 4] {
    let dir = match link.direction {
        Direction::Uplink => 0,
        Direction::Downlink => 1,
    };
    let side = link.side.map_or(0, |s| s.index() as u64 + 1);
    [dir, link.cluster as u64, link.relay as u64, side]
}

/// All channel matrices of one quasi-static slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    slot: u64,
    fading: LinkMatrices,
    links: LinkMatrices,
}

impl ChannelSet {
    pub fn slot(&self) -> u64 {
        self.slot
    }

    /// Path-loss-scaled matrices.
    pub fn links(&self) -> &LinkMatrices {
        &self.links
    }

    /// Unscaled small-scale matrices `G`.
    pub fn fading(&self) -> &LinkMatrices {
        &self.fading
    }
}

fn scale_link(link: LinkId, g: &ChannelMatrix, dims: &NetworkDims, params: &ChannelParams) -> Result<ChannelMatrix> {
    let relay = Node::Relay(link.relay);
    match link.direction {
        Direction::Uplink => {
            // Columns [0, Ms) come from S1, [Ms, 2Ms) from S2.
            let mut h = g.clone();
            for side in Side::BOTH {
                let src = Node::Source {
                    cluster: link.cluster,
                    side,
                };
                let d = params.distances.distance(src, relay);
                let s = libm::sqrt(params.gamma) * libm::pow(d, -params.xi);
                let cols = side.index() * dims.ms..(side.index() + 1) * dims.ms;
                for r in 0..h.rows() {
                    for c in cols.clone() {
                        h.set(r, c, g.get(r, c) * s);
                    }
                }
            }
            Ok(h)
        }
        Direction::Downlink => {
            let side = link.side.unwrap_or(Side::S1);
            let dst = Node::Source {
                cluster: link.cluster,
                side,
            };
            apply_path_loss(g, params.gamma, params.xi, params.distances.distance(relay, dst))
        }
    }
}

/// Channels of the next slot.
///
/// With no `prev`, every link is drawn i.i.d. (stationary start) and the
/// slot index is 0. Otherwise each link's small-scale matrix is evolved
/// with correlation `params.rho`. Each link draws from its own sub-stream
/// of `stream_seed`.
pub fn slot_channels(
    prev: Option<&ChannelSet>,
    dims: &NetworkDims,
    params: &ChannelParams,
    stream_seed: u64,
) -> Result<ChannelSet> {
    params.validate()?;
    dims.validate()?;
    if let Some(p) = prev {
        if p.fading.dims() != dims {
            return Err(Error::LayoutMismatch);
        }
    }
    let fading = LinkMatrices::from_links(*dims, |link| {
        let mut r = rng::stream(stream_seed, &link_tags(link));
        match prev {
            Some(p) => evolve(p.fading.get(link), params.rho, params.sigma2, &mut r),
            None => {
                let (rows, cols) = match link.direction {
                    Direction::Uplink => dims.uplink_shape(),
                    Direction::Downlink => dims.downlink_shape(),
                };
                draw_iid(rows, cols, params.sigma2, &mut r)
            }
        }
    })?;
    let links = LinkMatrices::from_links(*dims, |link| scale_link(link, fading.get(link), dims, params))?;
    let slot = prev.map_or(0, |p| p.slot + 1);
    Ok(ChannelSet { slot, fading, links })
}
