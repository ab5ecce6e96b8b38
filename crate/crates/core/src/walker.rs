//! Random walk generation: scalar walks, lockstep bouquets and campaigns.
//!
//! A walk is fully determined by its start vertex, length, selector and seed.
//! Bouquets only change the order in which steps are taken: `B` lanes start at
//! the same vertex and all of them advance one step before any takes the next.
//! With [`SelectorKind::Scaled`] and seeds sorted ascending, neighboring lanes
//! tend to pick the same neighbor, so a bouquet touches few distinct vertices
//! per step.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::graph::{Graph, VertexId};
use crate::rng::{self, HashSpec, NaiveMod, Scaled, SeedSet, Selector, SelectorKind, XorMod};
use crate::{Error, Result};

/// Lane widths the bouquet kernel is instantiated for.
pub const SUPPORTED_LANES: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];

pub const DEFAULT_LANES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub vertices: Vec<VertexId>,
    /// Walk id within its seed set; `0` for standalone walks.
    pub walk_id: u64,
    pub seed: u32,
}

/// How a batch of walks is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WalkerMode {
    /// One walk at a time, per-walk LCG, modulus selection.
    Naive,
    /// Lockstep lanes, per-walk LCG, modulus selection.
    VectorMod,
    /// Lockstep lanes, hashed scaled selection, seeds in generation order.
    Hash,
    /// Lockstep lanes, hashed scaled selection, seeds sorted ascending.
    Saba,
}

impl WalkerMode {
    pub const ALL: [WalkerMode; 4] = [Self::Naive, Self::VectorMod, Self::Hash, Self::Saba];

    pub fn default_selector(self) -> SelectorKind {
        match self {
            Self::Naive | Self::VectorMod => SelectorKind::NaiveMod,
            Self::Hash | Self::Saba => SelectorKind::Scaled,
        }
    }

    pub fn is_batched(self) -> bool {
        !matches!(self, Self::Naive)
    }

    pub fn sorts_seeds(self) -> bool {
        matches!(self, Self::Saba)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Naive => "naive",
            Self::VectorMod => "vector-mod",
            Self::Hash => "hash",
            Self::Saba => "saba",
        }
    }
}

impl fmt::Display for WalkerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WalkerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Self::Naive),
            "vector-mod" | "avx2" => Ok(Self::VectorMod),
            "hash" => Ok(Self::Hash),
            "saba" => Ok(Self::Saba),
            other => Err(Error::config(format!(
                "unknown walker mode `{other}` (expected naive, vector-mod, hash or saba)"
            ))),
        }
    }
}

/// Execution plan for a batch of walks from one start vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkPlan {
    pub selector: SelectorKind,
    /// Lane count of a bouquet; ignored for scalar plans.
    pub lanes: usize,
    pub batched: bool,
    pub sort_seeds: bool,
}

impl WalkPlan {
    pub fn new(mode: WalkerMode, selector: Option<SelectorKind>, lanes: usize) -> Result<Self> {
        if mode.is_batched() && !SUPPORTED_LANES.contains(&lanes) {
            return Err(Error::config(format!(
                "lane width {lanes} unsupported (expected one of {SUPPORTED_LANES:?})"
            )));
        }
        Ok(Self {
            selector: selector.unwrap_or(mode.default_selector()),
            lanes,
            batched: mode.is_batched(),
            sort_seeds: mode.sorts_seeds(),
        })
    }
}

/// One lockstep step of one bouquet, as seen by [`branching_stats`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BouquetStep {
    pub step: u32,
    pub active: u32,
    pub distinct: u32,
}

/// Mergeable per-step distinct-lane counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchingAccumulator {
    lanes: usize,
    histogram: Vec<u64>,
    per_step: Vec<u64>,
}

impl BranchingAccumulator {
    pub fn new(lanes: usize) -> Self {
        Self {
            lanes,
            histogram: vec![0; lanes + 1],
            per_step: Vec::new(),
        }
    }

    #[inline]
    pub fn record(&mut self, step: u32, distinct: u32) {
        let d = distinct as usize;
        if d >= self.histogram.len() {
            self.histogram.resize(d + 1, 0);
        }
        self.histogram[d] += 1;
        let s = step as usize;
        if s >= self.per_step.len() {
            self.per_step.resize(s + 1, 0);
        }
        self.per_step[s] += u64::from(distinct);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.histogram.len() > self.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
        if other.per_step.len() > self.per_step.len() {
            self.per_step.resize(other.per_step.len(), 0);
        }
        for (a, b) in self.per_step.iter_mut().zip(&other.per_step) {
            *a += b;
        }
    }

    pub fn observations(&self) -> u64 {
        self.histogram.iter().sum()
    }

    pub fn finish(&self) -> Result<BranchingStats> {
        let total = self.observations();
        if total == 0 {
            return Err(Error::EmptyTrace);
        }
        let percentile = |p: f64| -> u32 {
            let rank = ((p / 100.0) * total as f64).ceil().max(1.0) as u64;
            let mut seen = 0;
            for (d, &c) in self.histogram.iter().enumerate() {
                seen += c;
                if seen >= rank {
                    return d as u32;
                }
            }
            (self.histogram.len() - 1) as u32
        };
        let weighted: u64 = self
            .histogram
            .iter()
            .enumerate()
            .map(|(d, &c)| d as u64 * c)
            .sum();
        let mean = weighted as f64 / total as f64;
        Ok(BranchingStats {
            lanes: self.lanes,
            observations: total,
            histogram: self.histogram.clone(),
            per_step_distinct: self.per_step.clone(),
            p1: percentile(1.0),
            p10: percentile(10.0),
            p25: percentile(25.0),
            mean,
            beta_hat: crate::bench::estimate_bins(mean, self.lanes),
        })
    }
}

/// Distinct-lane statistics of bouquet steps (steps `1..L`; the start step,
/// where every lane sits on the same vertex, is not counted).
#[derive(Debug, Clone, PartialEq)]
pub struct BranchingStats {
    /// Lane count per bouquet (alpha).
    pub lanes: usize,
    pub observations: u64,
    /// `histogram[eta]` = number of bouquet steps with `eta` distinct lanes.
    pub histogram: Vec<u64>,
    /// Sum of distinct counts at each step index.
    pub per_step_distinct: Vec<u64>,
    /// Percentiles of the ascending distinct-count order.
    pub p1: u32,
    pub p10: u32,
    pub p25: u32,
    pub mean: f64,
    /// Candidate-set size (beta) that would explain `mean` under uniform
    /// independent sampling; `None` when the lanes look fully distinct.
    pub beta_hat: Option<f64>,
}

impl BranchingStats {
    /// Total distinct lane vertices over all recorded steps.
    pub fn distinct_total(&self) -> u64 {
        self.per_step_distinct.iter().sum()
    }
}

/// Aggregates a bouquet trace. Errors on an empty trace.
pub fn branching_stats(trace: &[BouquetStep], lanes: usize) -> Result<BranchingStats> {
    let mut acc = BranchingAccumulator::new(lanes);
    for s in trace {
        debug_assert!(s.distinct >= 1 && s.distinct <= s.active);
        acc.record(s.step, s.distinct);
    }
    acc.finish()
}

#[inline]
fn count_distinct(lanes: &[VertexId]) -> u32 {
    let mut distinct = 0;
    for (b, v) in lanes.iter().enumerate() {
        if !lanes[..b].contains(v) {
            distinct += 1;
        }
    }
    distinct
}

#[inline(always)]
fn walk_one<S: Selector, F>(g: &Graph, hash: &HashSpec, start: VertexId, length: usize, seed: u32, visit: &mut F)
where
    F: FnMut(u32, VertexId),
{
    let offsets = g.offsets();
    let adjacency = g.adjacency();
    let mut state = S::init(seed);
    let mut cur = start;
    visit(0, cur);
    for step in 1..length as u32 {
        let lo = offsets[cur as usize];
        let degree = (offsets[cur as usize + 1] - lo) as u32;
        let raw = S::raw(&mut state, hash, cur, step);
        cur = adjacency[lo + S::index(raw, degree) as usize];
        visit(step, cur);
    }
}

#[inline(always)]
fn bouquet<S: Selector, const B: usize, F>(
    g: &Graph,
    hash: &HashSpec,
    start: VertexId,
    length: usize,
    seeds: &[u32],
    mut trace: Option<&mut BranchingAccumulator>,
    visit: &mut F,
) where
    F: FnMut(u32, &[VertexId]),
{
    let active = seeds.len();
    debug_assert!(active >= 1 && active <= B);
    let offsets = g.offsets();
    let adjacency = g.adjacency();
    // Masked-off lanes replay lane 0 and are never reported.
    let mut state: [S::State; B] = std::array::from_fn(|b| S::init(seeds[if b < active { b } else { 0 }]));
    let mut cur = [start; B];
    visit(0, &cur[..active]);
    for step in 1..length as u32 {
        for b in 0..B {
            let c = cur[b];
            let lo = offsets[c as usize];
            let degree = (offsets[c as usize + 1] - lo) as u32;
            let raw = S::raw(&mut state[b], hash, c, step);
            cur[b] = adjacency[lo + S::index(raw, degree) as usize];
        }
        if let Some(t) = trace.as_deref_mut() {
            t.record(step, count_distinct(&cur[..active]));
        }
        visit(step, &cur[..active]);
    }
}

fn check_start(g: &Graph, start: VertexId, length: usize) -> Result<()> {
    if length == 0 {
        return Err(Error::config("walk length must be at least 1"));
    }
    if start as usize >= g.n() {
        return Err(Error::config(format!("start vertex {start} out of range")));
    }
    if length > 1 && g.degree(start) == 0 {
        return Err(Error::IsolatedVertex(start));
    }
    Ok(())
}

macro_rules! with_lanes {
    ($lanes:expr, $B:ident => $body:expr) => {
        match $lanes {
            1 => { const $B: usize = 1; $body }
            2 => { const $B: usize = 2; $body }
            4 => { const $B: usize = 4; $body }
            8 => { const $B: usize = 8; $body }
            16 => { const $B: usize = 16; $body }
            32 => { const $B: usize = 32; $body }
            64 => { const $B: usize = 64; $body }
            other => unreachable!("lane width {other} passed validation"),
        }
    };
}

#[allow(clippy::too_many_arguments)]
fn walk_many_with<S: Selector, F>(
    g: &Graph,
    hash: &HashSpec,
    start: VertexId,
    length: usize,
    seeds: &[u32],
    plan: &WalkPlan,
    mut trace: Option<&mut BranchingAccumulator>,
    visit: &mut F,
) where
    F: FnMut(usize, u32, &[VertexId]),
{
    if !plan.batched {
        for (i, &seed) in seeds.iter().enumerate() {
            walk_one::<S, _>(g, hash, start, length, seed, &mut |step, v| visit(i, step, &[v]));
        }
        return;
    }
    with_lanes!(plan.lanes, B => {
        for (chunk, lane_seeds) in seeds.chunks(B).enumerate() {
            bouquet::<S, B, _>(
                g,
                hash,
                start,
                length,
                lane_seeds,
                trace.as_deref_mut(),
                &mut |step, lanes| visit(chunk * B, step, lanes),
            );
        }
    })
}

/// Generates one walk per seed from `start` following `plan` (seeds are used
/// in the given order; sorting is the caller's business).
///
/// `visit(first, step, vertices)` receives the step-`step` vertices of walks
/// `first .. first + vertices.len()`. Scalar plans report one vertex at a
/// time, walk after walk; batched plans report a whole bouquet per step.
#[allow(clippy::too_many_arguments)]
pub fn walk_many<F>(
    g: &Graph,
    hash: &HashSpec,
    start: VertexId,
    length: usize,
    seeds: &[u32],
    plan: &WalkPlan,
    trace: Option<&mut BranchingAccumulator>,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, u32, &[VertexId]),
{
    check_start(g, start, length)?;
    if plan.batched && !SUPPORTED_LANES.contains(&plan.lanes) {
        return Err(Error::config(format!("lane width {} unsupported", plan.lanes)));
    }
    match plan.selector {
        SelectorKind::NaiveMod => walk_many_with::<NaiveMod, F>(g, hash, start, length, seeds, plan, trace, &mut visit),
        SelectorKind::XorMod => walk_many_with::<XorMod, F>(g, hash, start, length, seeds, plan, trace, &mut visit),
        SelectorKind::Scaled => walk_many_with::<Scaled, F>(g, hash, start, length, seeds, plan, trace, &mut visit),
    }
    Ok(())
}

/// A single walk of `length` vertices from `v`.
pub fn random_walk(
    g: &Graph,
    v: VertexId,
    length: usize,
    selector: SelectorKind,
    seed: u32,
    hash: &HashSpec,
) -> Result<Walk> {
    let plan = WalkPlan {
        selector,
        lanes: 1,
        batched: false,
        sort_seeds: false,
    };
    let mut vertices = Vec::with_capacity(length);
    walk_many(g, hash, v, length, &[seed], &plan, None, |_, _, vs| vertices.extend_from_slice(vs))?;
    Ok(Walk {
        vertices,
        walk_id: 0,
        seed,
    })
}

/// A bouquet of `width` walks from `v` using the first `width` seeds of
/// `seeds`, advanced in lockstep.
pub fn random_bouquet(
    g: &Graph,
    v: VertexId,
    length: usize,
    width: usize,
    seeds: &SeedSet,
    selector: SelectorKind,
    hash: &HashSpec,
) -> Result<Vec<Walk>> {
    if width == 0 || seeds.len() < width {
        return Err(Error::config(format!(
            "bouquet of width {width} needs at least that many seeds (have {})",
            seeds.len()
        )));
    }
    let lanes = SUPPORTED_LANES
        .iter()
        .copied()
        .find(|&l| l >= width)
        .ok_or_else(|| Error::config(format!("bouquet width {width} above {}", DEFAULT_LANES * 8)))?;
    let plan = WalkPlan {
        selector,
        lanes,
        batched: true,
        sort_seeds: false,
    };
    let mut walks: Vec<Walk> = seeds.seeds()[..width]
        .iter()
        .zip(seeds.walk_ids())
        .map(|(&seed, &walk_id)| Walk {
            vertices: Vec::with_capacity(length),
            walk_id,
            seed,
        })
        .collect();
    walk_many(g, hash, v, length, &seeds.seeds()[..width], &plan, None, |first, _, vs| {
        for (k, &x) in vs.iter().enumerate() {
            walks[first + k].vertices.push(x);
        }
    })?;
    Ok(walks)
}

/// Receives walk steps as they are generated.
///
/// Implementations must accumulate associatively and commutatively: lane
/// batching and thread scheduling change the order of calls, never the set.
pub trait WalkSink {
    fn visit(&mut self, walk_id: u64, step: u32, vertex: VertexId);

    fn visit_lanes(&mut self, walk_ids: &[u64], step: u32, vertices: &[VertexId]) {
        for (&id, &v) in walk_ids.iter().zip(vertices) {
            self.visit(id, step, v);
        }
    }

    fn finish(&mut self) {}
}

/// A sink that can be split into per-thread shards and merged back.
pub trait CampaignSink: WalkSink + Send + Sync + Sized {
    /// An empty shard of the same shape.
    fn fork(&self) -> Self;
    fn absorb(&mut self, other: Self);
}

/// Per-vertex visit counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitCounter {
    counts: Vec<u64>,
}

impl VisitCounter {
    pub fn new(n: usize) -> Self {
        Self { counts: vec![0; n] }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

impl WalkSink for VisitCounter {
    #[inline]
    fn visit(&mut self, _: u64, _: u32, vertex: VertexId) {
        self.counts[vertex as usize] += 1;
    }

    #[inline]
    fn visit_lanes(&mut self, _: &[u64], _: u32, vertices: &[VertexId]) {
        for &v in vertices {
            self.counts[v as usize] += 1;
        }
    }
}

impl CampaignSink for VisitCounter {
    fn fork(&self) -> Self {
        Self::new(self.counts.len())
    }

    fn absorb(&mut self, other: Self) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub walks_per_vertex: usize,
    /// Vertices per walk.
    pub length: usize,
    pub mode: WalkerMode,
    /// Overrides the mode's default selector.
    pub selector: Option<SelectorKind>,
    pub lanes: usize,
    pub threads: usize,
    pub master_seed: u64,
    pub hash: HashSpec,
    /// Record distinct-lane counts (batched modes only).
    pub collect_branching: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            walks_per_vertex: 2048,
            length: 10,
            mode: WalkerMode::Saba,
            selector: None,
            lanes: DEFAULT_LANES,
            threads: 1,
            master_seed: 0x5eed,
            hash: HashSpec::default(),
            collect_branching: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub mode: WalkerMode,
    pub wall_seconds: f64,
    pub walks: u64,
    /// Selections made: `n * K * (L - 1)`.
    pub total_steps: u64,
    pub branching: Option<BranchingStats>,
}

struct Shard<S> {
    sink: S,
    trace: Option<BranchingAccumulator>,
    keys: Vec<u64>,
    scratch: Vec<u64>,
    seeds: Vec<u32>,
    ids: Vec<u64>,
}

/// Generates `walks_per_vertex` walks of `length` vertices from every vertex
/// and streams each step into `sink`.
///
/// Walk `k` from vertex `v` has id `v * K + k` and seed
/// [`rng::walk_seed`]`(master_seed, id)`, whatever the mode, so `hash` and
/// `saba` campaigns produce the same walks in a different order.
pub fn run_walk_campaign<S: CampaignSink>(
    g: &Graph,
    config: &CampaignConfig,
    sink: &mut S,
) -> Result<CampaignReport> {
    let k = config.walks_per_vertex;
    if k == 0 || config.length == 0 {
        return Err(Error::config("walks per vertex and walk length must be positive"));
    }
    if k as u64 > u64::from(u32::MAX) {
        return Err(Error::config("at most 2^32 - 1 walks per vertex"));
    }
    let plan = WalkPlan::new(config.mode, config.selector, config.lanes)?;
    if config.length > 1 {
        if let Some(v) = (0..g.n() as VertexId).find(|&v| g.degree(v) == 0) {
            return Err(Error::IsolatedVertex(v));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.max(1))
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let tracing = config.collect_branching && plan.batched;
    let lanes = config.lanes;
    let hash = config.hash;
    let length = config.length;
    let master = config.master_seed;

    let new_shard = || Shard {
        sink: sink.fork(),
        trace: tracing.then(|| BranchingAccumulator::new(lanes)),
        keys: Vec::with_capacity(k),
        scratch: Vec::new(),
        seeds: Vec::with_capacity(k),
        ids: Vec::with_capacity(k),
    };

    let started = Instant::now();
    let merged = pool.install(|| {
        (0..g.n() as VertexId)
            .into_par_iter()
            .with_min_len(4)
            .fold(new_shard, |mut shard, v| {
                fill_seeds(&mut shard, master, v, k, plan.sort_seeds);
                let Shard { sink, trace, seeds, ids, .. } = &mut shard;
                walk_many(g, &hash, v, length, seeds, &plan, trace.as_mut(), |first, step, vs| {
                    sink.visit_lanes(&ids[first..first + vs.len()], step, vs)
                })
                .expect("start vertices were validated");
                shard
            })
            .reduce(new_shard, |mut a, b| {
                a.sink.absorb(b.sink);
                if let (Some(ta), Some(tb)) = (a.trace.as_mut(), b.trace.as_ref()) {
                    ta.merge(tb);
                }
                a
            })
    });
    let wall_seconds = started.elapsed().as_secs_f64();

    sink.absorb(merged.sink);
    sink.finish();
    let walks = g.n() as u64 * k as u64;
    let branching = match merged.trace {
        Some(t) if t.observations() > 0 => Some(t.finish()?),
        _ => None,
    };
    Ok(CampaignReport {
        mode: config.mode,
        wall_seconds,
        walks,
        total_steps: walks * (length as u64 - 1),
        branching,
    })
}

fn fill_seeds<S>(shard: &mut Shard<S>, master: u64, v: VertexId, k: usize, sort: bool) {
    let base = u64::from(v) * k as u64;
    shard.seeds.clear();
    shard.ids.clear();
    if sort {
        shard.keys.clear();
        shard
            .keys
            .extend((0..k as u64).map(|i| (u64::from(rng::walk_seed(master, base + i)) << 32) | i));
        rng::sort_keys_by_seed(&mut shard.keys, &mut shard.scratch);
        for &key in &shard.keys {
            shard.seeds.push((key >> 32) as u32);
            shard.ids.push(base + (key & 0xffff_ffff));
        }
    } else {
        for i in 0..k as u64 {
            shard.seeds.push(rng::walk_seed(master, base + i));
            shard.ids.push(base + i);
        }
    }
}
