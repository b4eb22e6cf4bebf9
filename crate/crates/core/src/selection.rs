//! Maximum-minimum-distance (MMD) relay selection.
//!
//! Metrics are evaluated over the set of distinct nonzero difference
//! vectors `x_i - x_j` (one representative per `±` pair), which yields the
//! same minimum as enumerating every unordered candidate pair. Tables keep
//! every candidate value so buffer-eligibility filters only re-run the
//! argmax. Ties are broken towards the lowest index everywhere.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::buffers::BufferSummary;
use crate::channel::{ChannelMatrix, LinkMatrices, Side};
use crate::error::{invalid, Error, Result};
use crate::signal::Constellation;

/// Distinct nonzero difference vectors of length `len`, one per `±` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceSet {
    len: usize,
    vectors: Vec<Complex64>,
}

fn is_canonical(d: &[Complex64]) -> bool {
    match d.iter().find(|z| z.re != 0.0 || z.im != 0.0) {
        Some(z) => z.re > 0.0 || (z.re == 0.0 && z.im > 0.0),
        None => false,
    }
}

impl DifferenceSet {
    pub fn new(alphabet: &Constellation, len: usize) -> Self {
        let mut entry: Vec<Complex64> = Vec::new();
        for a in alphabet.points() {
            for b in alphabet.points() {
                let d = a - b;
                if !entry
                    .iter()
                    .any(|e| e.re.to_bits() == d.re.to_bits() && e.im.to_bits() == d.im.to_bits())
                {
                    entry.push(d);
                }
            }
        }
        let base = entry.len();
        let total = base.pow(len as u32);
        let mut vectors = Vec::new();
        let mut d = vec![Complex64::new(0.0, 0.0); len];
        for idx in 0..total {
            let mut c = idx;
            for slot in d.iter_mut().rev() {
                *slot = entry[c % base];
                c /= base;
            }
            if is_canonical(&d) {
                vectors.extend_from_slice(&d);
            }
        }
        Self { len, vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.len() / self.len
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector_len(&self) -> usize {
        self.len
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Complex64]> {
        self.vectors.chunks_exact(self.len)
    }

    /// `min_d ||H d||^2`.
    pub fn min_image_norm_sqr(&self, h: &ChannelMatrix) -> f64 {
        debug_assert_eq!(h.cols(), self.len);
        self.iter().map(|d| h.image_norm_sqr(d)).fold(f64::INFINITY, f64::min)
    }
}

/// MA-mode metric table, `G^u`, `G_{SR_n}`, `G_{k,maxSR}` and `G_{maxSR}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaMetricTable {
    clusters: usize,
    relays: usize,
    blocks: usize,
    g_sub: Vec<f64>,
    g_relay: Vec<f64>,
    g_cluster: Vec<f64>,
    best_relay: Vec<usize>,
    best: MaChoice,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaChoice {
    pub cluster: usize,
    pub relay: usize,
    pub value: f64,
}

impl MaMetricTable {
    /// Builds the reductions from per-block values laid out
    /// `[cluster][relay][block]`.
    pub fn from_sub_metrics(clusters: usize, relays: usize, blocks: usize, g_sub: Vec<f64>) -> Result<Self> {
        if clusters == 0 || relays == 0 || blocks == 0 {
            return Err(invalid("MaMetricTable", "empty table"));
        }
        if g_sub.len() != clusters * relays * blocks {
            return Err(Error::DimensionMismatch {
                expected: clusters * relays * blocks,
                actual: g_sub.len(),
            });
        }
        let g_relay: Vec<f64> = g_sub
            .chunks_exact(blocks)
            .map(|b| b.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        let mut g_cluster = Vec::with_capacity(clusters);
        let mut best_relay = Vec::with_capacity(clusters);
        for row in g_relay.chunks_exact(relays) {
            let (n, v) = argmax(row.iter().copied());
            best_relay.push(n);
            g_cluster.push(v);
        }
        let (k, value) = argmax(g_cluster.iter().copied());
        let best = MaChoice {
            cluster: k,
            relay: best_relay[k],
            value,
        };
        Ok(Self {
            clusters,
            relays,
            blocks,
            g_sub,
            g_relay,
            g_cluster,
            best_relay,
            best,
        })
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn relays(&self) -> usize {
        self.relays
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn sub(&self, cluster: usize, relay: usize, block: usize) -> f64 {
        self.g_sub[(cluster * self.relays + relay) * self.blocks + block]
    }

    pub fn relay(&self, cluster: usize, relay: usize) -> f64 {
        self.g_relay[cluster * self.relays + relay]
    }

    pub fn cluster(&self, cluster: usize) -> f64 {
        self.g_cluster[cluster]
    }

    /// `G_{maxSR}`.
    pub fn max(&self) -> f64 {
        self.best.value
    }

    pub fn best(&self) -> MaChoice {
        self.best
    }

    pub fn best_in_cluster(&self, cluster: usize) -> MaChoice {
        MaChoice {
            cluster,
            relay: self.best_relay[cluster],
            value: self.g_cluster[cluster],
        }
    }

    /// Best candidate among clusters accepted by `eligible`.
    pub fn best_where(&self, eligible: impl Fn(usize) -> bool) -> Option<MaChoice> {
        best_cluster_where(&self.g_cluster, eligible).map(|k| self.best_in_cluster(k))
    }
}

/// Index and value of the first maximum.
fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

fn best_cluster_where(g_cluster: &[f64], eligible: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &v) in g_cluster.iter().enumerate() {
        if eligible(k) && best.is_none_or(|b| v > g_cluster[b]) {
            best = Some(k);
        }
    }
    best
}

/// MA metrics over every `(cluster, relay, block)` of the estimated view.
pub fn ma_metrics(view: &LinkMatrices, es: f64, diffs: &DifferenceSet) -> Result<MaMetricTable> {
    let dims = *view.dims();
    let side = 2 * dims.ms;
    if diffs.vector_len() != side {
        return Err(Error::DimensionMismatch {
            expected: side,
            actual: diffs.vector_len(),
        });
    }
    let coef = es / dims.ms as f64;
    let mut g_sub = Vec::with_capacity(dims.clusters * dims.relays * dims.u);
    for k in 0..dims.clusters {
        for n in 0..dims.relays {
            let h = view.uplink(k, n);
            for u in 0..dims.u {
                let block = h.row_block(u * side..(u + 1) * side)?;
                g_sub.push(coef * diffs.min_image_norm_sqr(&block));
            }
        }
    }
    MaMetricTable::from_sub_metrics(dims.clusters, dims.relays, dims.u, g_sub)
}

/// Downlink relay set `{first, second}` with `first <= second`;
/// `first == second` is a single relay using two of its antenna subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelaySet {
    pub first: usize,
    pub second: usize,
}

impl RelaySet {
    pub fn is_single(&self) -> bool {
        self.first == self.second
    }
}

/// Transmit-subset pair `(v, v')`, zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AntennaPair {
    pub v: usize,
    pub v_prime: usize,
}

/// One downlink candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BcCandidate {
    pub set: RelaySet,
    pub pair: AntennaPair,
}

/// Downlink candidates of one cluster in canonical order: relay sets
/// ascending lexicographically (`first <= second`); for distinct relays all
/// `V^2` subset pairs, for a single relay the pairs with `v < v'`.
pub fn bc_candidates(relays: usize, v: usize) -> Vec<BcCandidate> {
    let mut out = Vec::new();
    for first in 0..relays {
        for second in first..relays {
            let set = RelaySet { first, second };
            for a in 0..v {
                let start = if set.is_single() { a + 1 } else { 0 };
                for b in start..v {
                    out.push(BcCandidate {
                        set,
                        pair: AntennaPair { v: a, v_prime: b },
                    });
                }
            }
        }
    }
    out
}

/// Combined downlink matrix `H^v_{R_first,S} + H^v'_{R_second,S}`.
pub fn combined_downlink(view: &LinkMatrices, cluster: usize, side: Side, cand: &BcCandidate) -> Result<ChannelMatrix> {
    let ms = view.dims().ms;
    let a = view
        .downlink(cand.set.first, side, cluster)
        .col_block(cand.pair.v * ms..(cand.pair.v + 1) * ms)?;
    let b = view
        .downlink(cand.set.second, side, cluster)
        .col_block(cand.pair.v_prime * ms..(cand.pair.v_prime + 1) * ms)?;
    a.add(&b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcChoice {
    pub cluster: usize,
    pub set: RelaySet,
    pub pair: AntennaPair,
    pub value: f64,
}

/// BC-mode metric table.
#[derive(Debug, Clone, PartialEq)]
pub struct BcMetricTable {
    clusters: usize,
    candidates: Vec<BcCandidate>,
    /// Index of the first candidate of every relay set, plus a sentinel.
    set_starts: Vec<usize>,
    per_source: Vec<[f64; 2]>,
    g_pair_sub: Vec<f64>,
    g_pair: Vec<f64>,
    g_cluster: Vec<f64>,
    best_candidate: Vec<usize>,
    best: BcChoice,
}

impl BcMetricTable {
    /// Builds the reductions from per-source metrics laid out
    /// `[cluster][candidate]` in [`bc_candidates`] order.
    pub fn from_source_metrics(
        clusters: usize,
        candidates: Vec<BcCandidate>,
        per_source: Vec<[f64; 2]>,
    ) -> Result<Self> {
        let c = candidates.len();
        if clusters == 0 || c == 0 {
            return Err(invalid("BcMetricTable", "no downlink candidates"));
        }
        if per_source.len() != clusters * c {
            return Err(Error::DimensionMismatch {
                expected: clusters * c,
                actual: per_source.len(),
            });
        }
        let mut set_starts = Vec::new();
        for (i, cand) in candidates.iter().enumerate() {
            if i == 0 || candidates[i - 1].set != cand.set {
                set_starts.push(i);
            }
        }
        set_starts.push(c);
        let sets = set_starts.len() - 1;

        let g_pair_sub: Vec<f64> = per_source.iter().map(|[a, b]| a.min(*b)).collect();
        let mut g_pair = Vec::with_capacity(clusters * sets);
        let mut g_cluster = Vec::with_capacity(clusters);
        let mut best_candidate = Vec::with_capacity(clusters);
        for k in 0..clusters {
            let row = &g_pair_sub[k * c..(k + 1) * c];
            for w in set_starts.windows(2) {
                g_pair.push(argmax(row[w[0]..w[1]].iter().copied()).1);
            }
            let (i, v) = argmax(row.iter().copied());
            best_candidate.push(i);
            g_cluster.push(v);
        }
        let (k, value) = argmax(g_cluster.iter().copied());
        let cand = candidates[best_candidate[k]];
        let best = BcChoice {
            cluster: k,
            set: cand.set,
            pair: cand.pair,
            value,
        };
        Ok(Self {
            clusters,
            candidates,
            set_starts,
            per_source,
            g_pair_sub,
            g_pair,
            g_cluster,
            best_candidate,
            best,
        })
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn candidates(&self) -> &[BcCandidate] {
        &self.candidates
    }

    /// Number of relay sets per cluster, `N'`.
    pub fn relay_sets(&self) -> usize {
        self.set_starts.len() - 1
    }

    pub fn source_metrics(&self, cluster: usize, candidate: usize) -> [f64; 2] {
        self.per_source[cluster * self.candidates.len() + candidate]
    }

    pub fn pair_sub(&self, cluster: usize, candidate: usize) -> f64 {
        self.g_pair_sub[cluster * self.candidates.len() + candidate]
    }

    /// `G_{R_nl S}` of the `set`-th relay set.
    pub fn pair(&self, cluster: usize, set: usize) -> f64 {
        self.g_pair[cluster * self.relay_sets() + set]
    }

    /// Candidate index range of the `set`-th relay set.
    pub fn set_range(&self, set: usize) -> core::ops::Range<usize> {
        self.set_starts[set]..self.set_starts[set + 1]
    }

    pub fn cluster(&self, cluster: usize) -> f64 {
        self.g_cluster[cluster]
    }

    /// `G_{maxRS}`.
    pub fn max(&self) -> f64 {
        self.best.value
    }

    pub fn best(&self) -> BcChoice {
        self.best
    }

    pub fn best_in_cluster(&self, cluster: usize) -> BcChoice {
        let cand = self.candidates[self.best_candidate[cluster]];
        BcChoice {
            cluster,
            set: cand.set,
            pair: cand.pair,
            value: self.g_cluster[cluster],
        }
    }

    pub fn best_where(&self, eligible: impl Fn(usize) -> bool) -> Option<BcChoice> {
        best_cluster_where(&self.g_cluster, eligible).map(|k| self.best_in_cluster(k))
    }
}

/// BC metrics over every `(cluster, relay set, subset pair)`.
pub fn bc_metrics(view: &LinkMatrices, es: f64, diffs: &DifferenceSet) -> Result<BcMetricTable> {
    let dims = *view.dims();
    if diffs.vector_len() != dims.ms {
        return Err(Error::DimensionMismatch {
            expected: dims.ms,
            actual: diffs.vector_len(),
        });
    }
    let candidates = bc_candidates(dims.relays, dims.v);
    let coef = es / (2.0 * dims.ms as f64);
    let ms = dims.ms;
    let mut per_source = Vec::with_capacity(dims.clusters * candidates.len());
    // blocks[(n * 2 + side) * V + v] for the current cluster
    let mut blocks: Vec<ChannelMatrix> = Vec::with_capacity(dims.relays * 2 * dims.v);
    for k in 0..dims.clusters {
        blocks.clear();
        for n in 0..dims.relays {
            for side in Side::BOTH {
                let h = view.downlink(n, side, k);
                for v in 0..dims.v {
                    blocks.push(h.col_block(v * ms..(v + 1) * ms)?);
                }
            }
        }
        let block = |n: usize, side: Side, v: usize| &blocks[(n * 2 + side.index()) * dims.v + v];
        for cand in &candidates {
            let mut m = [0.0; 2];
            for side in Side::BOTH {
                let comb =
                    block(cand.set.first, side, cand.pair.v).add(block(cand.set.second, side, cand.pair.v_prime))?;
                m[side.index()] = coef * diffs.min_image_norm_sqr(&comb);
            }
            per_source.push(m);
        }
    }
    BcMetricTable::from_source_metrics(dims.clusters, candidates, per_source)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftDecision {
    Reuse,
    Recompute,
}

/// `||H_pres - H_last||^2 / ||H_last||^2`, or `None` for a zero reference.
pub fn drift_ratio(current: &ChannelMatrix, last: &ChannelMatrix) -> Result<Option<f64>> {
    let dn = current.distance_sqr(last)?;
    let reference = last.norm_sqr();
    Ok(if reference > 0.0 { Some(dn / reference) } else { None })
}

/// Reuse iff a reference exists, is nonzero, and the drift ratio is at
/// most `p`.
pub fn drift_check(current: &ChannelMatrix, last: Option<&ChannelMatrix>, p: f64) -> Result<DriftDecision> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", "must lie in [0, 1]"));
    }
    let Some(last) = last else {
        return Ok(DriftDecision::Recompute);
    };
    Ok(match drift_ratio(current, last)? {
        Some(r) if r <= p => DriftDecision::Reuse,
        _ => DriftDecision::Recompute,
    })
}

/// `G = mean(samples_ma) / mean(samples_bc)`.
pub fn estimate_threshold(samples_ma: &[f64], samples_bc: &[f64]) -> Result<f64> {
    let mut est = ThresholdEstimator::default();
    samples_ma.iter().for_each(|&x| est.push_ma(x));
    samples_bc.iter().for_each(|&x| est.push_bc(x));
    est.value()
}

/// Running estimate of the mode threshold `G`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ThresholdEstimator {
    sum_ma: f64,
    n_ma: u64,
    sum_bc: f64,
    n_bc: u64,
}

impl ThresholdEstimator {
    pub fn push_ma(&mut self, g_max_sr: f64) {
        self.sum_ma += g_max_sr;
        self.n_ma += 1;
    }

    pub fn push_bc(&mut self, g_max_rs: f64) {
        self.sum_bc += g_max_rs;
        self.n_bc += 1;
    }

    pub fn samples(&self) -> (u64, u64) {
        (self.n_ma, self.n_bc)
    }

    pub fn value(&self) -> Result<f64> {
        if self.n_ma == 0 {
            return Err(Error::EmptySamples("G_maxSR"));
        }
        if self.n_bc == 0 {
            return Err(Error::EmptySamples("G_maxRS"));
        }
        let ma = self.sum_ma / self.n_ma as f64;
        let bc = self.sum_bc / self.n_bc as f64;
        if !(bc > 0.0) || !(ma > 0.0) {
            return Err(invalid("G", "sample means must be positive"));
        }
        Ok(ma / bc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ma,
    Bc,
}

/// Which branch of the mode rule produced a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// `N_p / M_S > L`: BC from the fullest buffer.
    ForcedBc,
    /// Metric ratio against `G`.
    Ratio,
    /// The ratio branch picked a mode with no eligible cluster.
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transmission {
    Ma { relay: usize },
    Bc { set: RelaySet, pair: AntennaPair },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionDecision {
    pub cluster: usize,
    pub transmission: Transmission,
    pub metric: f64,
    pub rule: Rule,
}

impl SelectionDecision {
    pub fn mode(&self) -> Mode {
        match self.transmission {
            Transmission::Ma { .. } => Mode::Ma,
            Transmission::Bc { .. } => Mode::Bc,
        }
    }

    fn from_ma(c: MaChoice, rule: Rule) -> Self {
        Self {
            cluster: c.cluster,
            transmission: Transmission::Ma { relay: c.relay },
            metric: c.value,
            rule,
        }
    }

    fn from_bc(c: BcChoice, rule: Rule) -> Self {
        Self {
            cluster: c.cluster,
            transmission: Transmission::Bc {
                set: c.set,
                pair: c.pair,
            },
            metric: c.value,
            rule,
        }
    }
}

/// Mode rule with buffer eligibility.
///
/// MA needs room for `ms` packets in the target buffer; BC needs at least
/// `ms` stored packets. The ratio uses the unfiltered maxima of both tables.
pub fn mode_select(
    ma: &MaMetricTable,
    bc: &BcMetricTable,
    buffers: &BufferSummary,
    l: usize,
    g: f64,
    ms: usize,
) -> SelectionDecision {
    let can_ma = |k: usize| buffers.can_store(k, ms);
    let can_bc = |k: usize| buffers.can_extract(k, ms);

    if buffers.total > l * ms && can_bc(buffers.fullest) {
        return SelectionDecision::from_bc(bc.best_in_cluster(buffers.fullest), Rule::ForcedBc);
    }

    let prefer_ma = bc.max() == 0.0 || ma.max() / bc.max() >= g;
    let ma_choice = ma.best_where(can_ma);
    let bc_choice = bc.best_where(can_bc);
    match (prefer_ma, ma_choice, bc_choice) {
        (true, Some(c), _) => SelectionDecision::from_ma(c, Rule::Ratio),
        (true, None, Some(c)) => SelectionDecision::from_bc(c, Rule::Fallback),
        (false, _, Some(c)) => SelectionDecision::from_bc(c, Rule::Ratio),
        (false, Some(c), None) => SelectionDecision::from_ma(c, Rule::Fallback),
        // Unreachable for a valid bank: "all full" and "all empty" exclude each other.
        (_, None, None) => SelectionDecision::from_ma(ma.best(), Rule::Fallback),
    }
}

/// When metric tables are refreshed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecomputePolicy {
    /// Recompute a direction only when its reference channel drifted by
    /// more than `p` (relative squared norm).
    Drift { p: f64 },
    /// Recompute both directions every slot.
    Always,
}

/// Which directions were recomputed in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Refresh {
    pub uplink: bool,
    pub downlink: bool,
}

/// Cached tables, drift references and recomputation counters.
#[derive(Debug, Clone, Default)]
pub struct DriftState {
    pub last_uplink: Option<ChannelMatrix>,
    pub last_downlink: Option<ChannelMatrix>,
    pub ma: Option<MaMetricTable>,
    pub bc: Option<BcMetricTable>,
    pub recompute_ul: u64,
    pub recompute_dl: u64,
}

/// Stateful selector owned by the slot loop.
#[derive(Debug, Clone)]
pub struct Selector {
    policy: RecomputePolicy,
    es: f64,
    up_diffs: DifferenceSet,
    down_diffs: DifferenceSet,
    state: DriftState,
    threshold: ThresholdEstimator,
}

/// Uplink drift reference: the full matrix of the chosen (cluster, relay).
fn uplink_reference(view: &LinkMatrices, c: &MaChoice) -> ChannelMatrix {
    view.uplink(c.cluster, c.relay).clone()
}

/// Downlink drift reference: the chosen relays' matrices towards both
/// sources, side by side.
fn downlink_reference(view: &LinkMatrices, c: &BcChoice) -> Result<ChannelMatrix> {
    let mut parts = vec![
        view.downlink(c.set.first, Side::S1, c.cluster),
        view.downlink(c.set.first, Side::S2, c.cluster),
    ];
    if !c.set.is_single() {
        parts.push(view.downlink(c.set.second, Side::S1, c.cluster));
        parts.push(view.downlink(c.set.second, Side::S2, c.cluster));
    }
    ChannelMatrix::hconcat(&parts)
}

impl Selector {
    pub fn new(policy: RecomputePolicy, es: f64, ms: usize, alphabet: &Constellation) -> Result<Self> {
        if let RecomputePolicy::Drift { p } = policy {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid("p", "must lie in [0, 1]"));
            }
        }
        if !(es > 0.0) {
            return Err(invalid("energy", "must be positive"));
        }
        Ok(Self {
            policy,
            es,
            up_diffs: DifferenceSet::new(alphabet, 2 * ms),
            down_diffs: DifferenceSet::new(alphabet, ms),
            state: DriftState::default(),
            threshold: ThresholdEstimator::default(),
        })
    }

    pub fn state(&self) -> &DriftState {
        &self.state
    }

    pub fn threshold(&self) -> &ThresholdEstimator {
        &self.threshold
    }

    /// Adds one independent draw to the `G` estimate without touching the
    /// cached tables.
    pub fn calibrate(&mut self, view: &LinkMatrices) -> Result<()> {
        self.threshold.push_ma(ma_metrics(view, self.es, &self.up_diffs)?.max());
        self.threshold
            .push_bc(bc_metrics(view, self.es, &self.down_diffs)?.max());
        Ok(())
    }

    /// Runs the drift observation for both directions and recomputes the
    /// tables that drifted.
    pub fn refresh(&mut self, view: &LinkMatrices) -> Result<Refresh> {
        let (up, down) = match self.policy {
            RecomputePolicy::Always => (true, true),
            RecomputePolicy::Drift { p } => {
                let up = match (&self.state.ma, &self.state.last_uplink) {
                    (Some(t), Some(last)) => {
                        drift_check(&uplink_reference(view, &t.best()), Some(last), p)? == DriftDecision::Recompute
                    }
                    _ => true,
                };
                let down = match (&self.state.bc, &self.state.last_downlink) {
                    (Some(t), Some(last)) => {
                        drift_check(&downlink_reference(view, &t.best())?, Some(last), p)? == DriftDecision::Recompute
                    }
                    _ => true,
                };
                (up, down)
            }
        };
        if up {
            let t = ma_metrics(view, self.es, &self.up_diffs)?;
            self.state.last_uplink = Some(uplink_reference(view, &t.best()));
            self.threshold.push_ma(t.max());
            self.state.ma = Some(t);
            self.state.recompute_ul += 1;
        }
        if down {
            let t = bc_metrics(view, self.es, &self.down_diffs)?;
            self.state.last_downlink = Some(downlink_reference(view, &t.best())?);
            self.threshold.push_bc(t.max());
            self.state.bc = Some(t);
            self.state.recompute_dl += 1;
        }
        Ok(Refresh {
            uplink: up,
            downlink: down,
        })
    }

    /// Mode decision over the cached tables. Requires a prior
    /// [`refresh`](Self::refresh).
    pub fn decide(&self, buffers: &BufferSummary, l: usize, ms: usize) -> Result<SelectionDecision> {
        let (Some(ma), Some(bc)) = (&self.state.ma, &self.state.bc) else {
            return Err(invalid("selector", "metrics not computed yet"));
        };
        Ok(mode_select(ma, bc, buffers, l, self.threshold.value()?, ms))
    }
}
