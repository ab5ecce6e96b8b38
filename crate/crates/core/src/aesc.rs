//! All-edges spanning centrality.
//!
//! The spanning centrality of an edge `{i, j}` is its effective resistance
//! `r(i, j)`, which expands over walk lengths as
//!
//! ```text
//! r(i, j) = g(i, j) + g(j, i),
//! g(i, j) = sum_l  q_l(i) / d(i) - q_l(j) / d(j)
//! ```
//!
//! where `q_l` is the landing distribution of an `l`-step walk from `i`. The
//! series is truncated at `tau` with the last term half-weighted, which makes
//! the eigenvalue `-1` of bipartite graphs contribute exactly its limit.
//!
//! Per source `i`, depths `0..=tau_tilde` are summed exactly by propagating
//! `q_l`; the tail `tau_tilde < l <= tau` is estimated by two-way random
//! walks from `i` and `j` that read `q_{tau_tilde}(x) / d(x)` at every vertex
//! they visit. `tau_tilde` is the first depth at which one more propagation
//! round would cost more than the walks it replaces.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::graph::{Graph, VertexId};
use crate::rng::{self, HashSpec, SelectorKind, SplitMix64};
use crate::walker::{self, WalkPlan, WalkerMode, DEFAULT_LANES};
use crate::{Error, Result};

pub const DEFAULT_TAU_MAX: u32 = 128;
pub const DEFAULT_EXACT_LIMIT: usize = 2000;
/// Decay estimates at or above `1 - DEGENERATE_GAP` fall back to `tau_max`.
pub const DEGENERATE_GAP: f64 = 1e-6;
/// Largest graph the matrix-tree cross-check runs on.
pub const TREE_COUNT_LIMIT: usize = 16;

const WALK_CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct AescConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Power-iteration steps for the decay estimate.
    pub omega: usize,
    /// Candidate-node count; recorded only.
    pub gamma: usize,
    pub mode: WalkerMode,
    /// Overrides the mode's default selector.
    pub selector: Option<SelectorKind>,
    pub lanes: usize,
    pub master_seed: u64,
    pub threads: usize,
    pub tau_max: u32,
    /// Per-edge truncation lengths instead of one graph-wide length.
    pub per_edge_tau: bool,
    /// Upper bound on the exact propagation depth; forces the walk phase to
    /// start no later than this depth.
    pub max_traversal_depth: Option<u32>,
    pub hash: HashSpec,
}

impl Default for AescConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            delta: 0.05,
            omega: 100,
            gamma: 0,
            mode: WalkerMode::Saba,
            selector: None,
            lanes: DEFAULT_LANES,
            master_seed: 0x5eed_5eed,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            tau_max: DEFAULT_TAU_MAX,
            per_edge_tau: false,
            max_traversal_depth: None,
            hash: HashSpec::default(),
        }
    }
}

impl AescConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::config(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.omega == 0 {
            return Err(Error::config("omega must be at least 1"));
        }
        if self.tau_max == 0 {
            return Err(Error::config("tau_max must be at least 1"));
        }
        WalkPlan::new(self.mode, self.selector, self.lanes)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationPlan {
    /// Truncation length per edge id.
    pub tau: Vec<u32>,
    /// Exact-propagation depth per source vertex; empty until [`aesc`] fills it.
    pub tau_tilde: Vec<u32>,
    pub lambda_hat: f64,
    /// The decay estimate was degenerate and every length is `tau_max`.
    pub fallback: bool,
}

impl TruncationPlan {
    pub fn max_tau(&self) -> u32 {
        self.tau.iter().copied().max().unwrap_or(0)
    }
}

/// Largest `|lambda|` of `D^-1/2 A D^-1/2` after deflating the eigenvector of
/// `1` (and of `-1` on bipartite graphs), by `omega` power-iteration steps.
pub fn estimate_decay(g: &Graph, omega: usize, seed: u64) -> f64 {
    let n = g.n();
    let two_m = 2.0 * g.m() as f64;
    if n < 2 || two_m == 0.0 {
        return 0.0;
    }
    let sqrt_d: Vec<f64> = (0..n as VertexId).map(|u| (g.degree(u) as f64).sqrt()).collect();
    let mut directions = vec![sqrt_d.iter().map(|s| s / two_m.sqrt()).collect::<Vec<f64>>()];
    if let Some(side) = g.bipartition() {
        directions.push(
            sqrt_d
                .iter()
                .zip(&side)
                .map(|(s, &c)| f64::from(c) * s / two_m.sqrt())
                .collect(),
        );
    }
    let deflate = |x: &mut [f64]| {
        for phi in &directions {
            let dot: f64 = x.iter().zip(phi).map(|(a, b)| a * b).sum();
            for (a, b) in x.iter_mut().zip(phi) {
                *a -= dot * b;
            }
        }
    };
    let normalize = |x: &mut [f64]| -> f64 {
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|a| *a /= norm);
        }
        norm
    };
    let mut rng = SplitMix64::new(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
    deflate(&mut x);
    if normalize(&mut x) < 1e-300 {
        return 0.0;
    }
    let mut y = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..omega {
        for u in 0..n {
            let su = sqrt_d[u];
            y[u] = g
                .neighbors(u as VertexId)
                .iter()
                .map(|&v| x[v as usize] / (su * sqrt_d[v as usize]))
                .sum();
        }
        deflate(&mut y);
        let norm = normalize(&mut y);
        if norm < 1e-300 {
            return 0.0;
        }
        estimate = norm;
        std::mem::swap(&mut x, &mut y);
    }
    estimate.min(1.0)
}

/// `ceil(ln(scale / (eps (1 - lambda))) / ln(1 / lambda))` clamped to `[1, tau_max]`.
pub fn truncation_length(lambda_hat: f64, epsilon: f64, scale: f64, tau_max: u32) -> u32 {
    if lambda_hat >= 1.0 - DEGENERATE_GAP {
        return tau_max;
    }
    if lambda_hat <= 1e-12 {
        return 1;
    }
    let tau = ((scale / (epsilon * (1.0 - lambda_hat))).ln() / (1.0 / lambda_hat).ln()).ceil();
    if tau.is_nan() || tau < 1.0 {
        1
    } else if tau >= f64::from(tau_max) {
        tau_max
    } else {
        tau as u32
    }
}

/// Truncation lengths bounding the truncation error of every edge by `eps / 2`.
///
/// The uniform length uses `scale = 4 d_max`; with `per_edge` the bound
/// `2 (1/d(i) + 1/d(j))` of the individual edge is used instead.
pub fn truncated_lengths(
    g: &Graph,
    epsilon: f64,
    omega: usize,
    tau_max: u32,
    per_edge: bool,
) -> Result<TruncationPlan> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let lambda_hat = estimate_decay(g, omega.max(1), 0x00de_ca1f);
    let fallback = lambda_hat >= 1.0 - DEGENERATE_GAP;
    if fallback {
        log::warn!("decay estimate {lambda_hat} is degenerate; truncating every edge at {tau_max}");
    }
    let tau = if per_edge {
        g.edges()
            .iter()
            .map(|&(u, v)| {
                let scale = 2.0 * (1.0 / g.degree(u) as f64 + 1.0 / g.degree(v) as f64);
                truncation_length(lambda_hat, epsilon, scale, tau_max)
            })
            .collect()
    } else {
        let t = truncation_length(lambda_hat, epsilon, 4.0 * g.max_degree() as f64, tau_max);
        vec![t; g.m()]
    };
    Ok(TruncationPlan {
        tau,
        tau_tilde: Vec::new(),
        lambda_hat,
        fallback,
    })
}

/// Two-way walk pairs needed for a walk tail of `tau_eff` steps.
///
/// The per-pair statistic lies in `[-tau_eff, tau_eff]` and enters the
/// estimate divided by `n_req * d_i`, so Hoeffding with accuracy `eps / 2`
/// and a union bound over the `2m` directed edges gives
/// `n_req = ceil(2 tau_eff^2 / (eps/2 * d_i)^2 * ln(4m / delta))`.
pub fn walk_budget(tau_eff: u32, epsilon: f64, delta: f64, degree: usize, m: usize) -> u64 {
    if tau_eff == 0 {
        return 0;
    }
    let half = epsilon / 2.0;
    let t = f64::from(tau_eff);
    let n = 2.0 * t * t / (half * degree as f64).powi(2) * (4.0 * m as f64 / delta).ln();
    if n >= u64::MAX as f64 {
        u64::MAX
    } else {
        (n.ceil() as u64).max(1)
    }
}

/// Sparse landing distribution over a dense, epoch-stamped array.
#[derive(Debug, Clone)]
pub struct LandingProbs {
    values: Vec<f64>,
    stamp: Vec<u32>,
    epoch: u32,
    support: Vec<VertexId>,
    support_degree: u64,
}

impl LandingProbs {
    pub fn new(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
            stamp: vec![0; n],
            epoch: 1,
            support: Vec::new(),
            support_degree: 0,
        }
    }

    fn reset(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.support.clear();
        self.support_degree = 0;
    }

    #[inline]
    fn add(&mut self, v: VertexId, mass: f64, degree: usize) {
        let i = v as usize;
        if self.stamp[i] == self.epoch {
            self.values[i] += mass;
        } else {
            self.stamp[i] = self.epoch;
            self.values[i] = mass;
            self.support.push(v);
            self.support_degree += degree as u64;
        }
    }

    #[inline]
    pub fn get(&self, v: VertexId) -> f64 {
        let i = v as usize;
        if self.stamp[i] == self.epoch {
            self.values[i]
        } else {
            0.0
        }
    }

    /// Vertices with positive mass, in discovery order.
    pub fn support(&self) -> &[VertexId] {
        &self.support
    }

    /// Sum of the degrees of the support.
    pub fn support_degree(&self) -> u64 {
        self.support_degree
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.support.iter().map(|&v| (v, self.values[v as usize]))
    }

    pub fn sum(&self) -> f64 {
        self.iter().map(|(_, p)| p).sum()
    }
}

/// Two landing buffers reused across sources.
#[derive(Debug, Clone)]
pub struct LandingWorkspace {
    current: LandingProbs,
    next: LandingProbs,
}

impl LandingWorkspace {
    pub fn new(n: usize) -> Self {
        Self {
            current: LandingProbs::new(n),
            next: LandingProbs::new(n),
        }
    }

    pub fn current(&self) -> &LandingProbs {
        &self.current
    }
}

/// Propagates the landing distribution of walks from `source` depth by depth.
///
/// Starts from the point mass at `source` and keeps propagating while the
/// support's degree sum is below `n_walks(depth)` (and `depth` is below
/// `depth_limit`). `on_depth` sees every distribution from depth 0 to the
/// final one. Returns the final depth; the distribution stays in
/// `workspace.current()`.
pub fn propagate_landing_probabilities<F, O>(
    g: &Graph,
    source: VertexId,
    mut n_walks: F,
    depth_limit: Option<u32>,
    workspace: &mut LandingWorkspace,
    mut on_depth: O,
) -> u32
where
    F: FnMut(u32) -> u64,
    O: FnMut(u32, &LandingProbs),
{
    let ws = workspace;
    ws.current.reset();
    ws.current.add(source, 1.0, g.degree(source));
    let mut depth = 0;
    on_depth(0, &ws.current);
    loop {
        if depth_limit.is_some_and(|limit| depth >= limit) {
            break;
        }
        if ws.current.support_degree() >= n_walks(depth) {
            break;
        }
        ws.next.reset();
        for &v in &ws.current.support {
            let p = ws.current.values[v as usize];
            let nb = g.neighbors(v);
            let share = p / nb.len() as f64;
            for &x in nb {
                ws.next.add(x, share, g.degree(x));
            }
        }
        std::mem::swap(&mut ws.current, &mut ws.next);
        depth += 1;
        on_depth(depth, &ws.current);
    }
    depth
}

/// Scratch space for [`estimate_edge`].
#[derive(Debug, Clone)]
pub struct WalkScratch {
    counts: Vec<i64>,
    stamp: Vec<u32>,
    epoch: u32,
    touched: Vec<VertexId>,
    keys: Vec<u64>,
    sort_scratch: Vec<u64>,
    seeds: Vec<u32>,
}

impl WalkScratch {
    pub fn new(n: usize) -> Self {
        Self {
            counts: vec![0; n],
            stamp: vec![0; n],
            epoch: 0,
            touched: Vec::new(),
            keys: Vec::new(),
            sort_scratch: Vec::new(),
            seeds: Vec::new(),
        }
    }

    fn reset(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.touched.clear();
    }
}

/// Walk generation parameters for the two-way walks of one directed edge.
#[derive(Debug, Clone, Copy)]
pub struct EdgeWalks {
    pub plan: WalkPlan,
    pub hash: HashSpec,
    /// Seed stream of the walks from the source; the target side uses a
    /// derived stream.
    pub stream: u64,
}

impl EdgeWalks {
    fn side_stream(&self, side: u64) -> u64 {
        rng::mix64(self.stream ^ side.wrapping_mul(0xa076_1d64_78bd_642f))
    }
}

/// Mean walk statistic of `n_req` two-way walk pairs over a tail of
/// `tau_eff` steps, i.e. the amount to add to `g(source, target)`.
///
/// Each walk reads `landing(x) / d(x)` at its vertices after the start (the
/// start itself is covered by the exact phase); the last step is
/// half-weighted. Visits are accumulated as integer counts, so the result does
/// not depend on the order walks are generated in.
#[allow(clippy::too_many_arguments)]
pub fn estimate_edge(
    g: &Graph,
    source: VertexId,
    target: VertexId,
    landing: &LandingProbs,
    tau_eff: u32,
    n_req: u64,
    walks: &EdgeWalks,
    scratch: &mut WalkScratch,
) -> Result<f64> {
    if tau_eff == 0 || n_req == 0 {
        return Ok(0.0);
    }
    scratch.reset();
    let length = tau_eff as usize + 1;
    for (side, start, sign) in [(0u64, source, 1i64), (1, target, -1)] {
        let stream = walks.side_stream(side);
        let mut done = 0u64;
        while done < n_req {
            let chunk = (n_req - done).min(WALK_CHUNK as u64);
            let WalkScratch {
                counts,
                stamp,
                epoch,
                touched,
                keys,
                sort_scratch,
                seeds,
            } = scratch;
            seeds.clear();
            if walks.plan.sort_seeds {
                keys.clear();
                keys.extend((done..done + chunk).map(|i| (u64::from(rng::walk_seed(stream, i)) << 32) | (i - done)));
                rng::sort_keys_by_seed(keys, sort_scratch);
                seeds.extend(keys.iter().map(|&k| (k >> 32) as u32));
            } else {
                seeds.extend((done..done + chunk).map(|i| rng::walk_seed(stream, i)));
            }
            walker::walk_many(g, &walks.hash, start, length, seeds, &walks.plan, None, |_, step, vs| {
                if step == 0 {
                    return;
                }
                let weight = if step == tau_eff { sign } else { 2 * sign };
                for &v in vs {
                    if landing.get(v) > 0.0 {
                        let i = v as usize;
                        if stamp[i] != *epoch {
                            stamp[i] = *epoch;
                            counts[i] = 0;
                            touched.push(v);
                        }
                        counts[i] += weight;
                    }
                }
            })?;
            done += chunk;
        }
    }
    scratch.touched.sort_unstable();
    let mut total = 0.0;
    for &v in &scratch.touched {
        let c = scratch.counts[v as usize];
        if c != 0 {
            total += landing.get(v) / g.degree(v) as f64 * c as f64;
        }
    }
    Ok(total / 2.0 / n_req as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityEstimate {
    /// Directed accumulator `g(u, v)` per adjacency slot of `u`.
    pub g_hat: Vec<f64>,
    /// `g(u, v) + g(v, u)` per edge id.
    pub s_hat: Vec<f64>,
    pub plan: TruncationPlan,
    pub config: AescConfig,
    pub walks: u64,
    /// Selections made by all walks.
    pub walk_steps: u64,
    /// Wall time of the estimation, excluding truncation planning.
    pub seconds: f64,
}

struct SourceResult {
    g_hat: Vec<f64>,
    tau_tilde: u32,
    walks: u64,
    walk_steps: u64,
}

struct Workspace {
    landing: LandingWorkspace,
    scratch: WalkScratch,
}

fn estimate_source(
    g: &Graph,
    source: VertexId,
    config: &AescConfig,
    plan: &WalkPlan,
    tau_of_edge: &[u32],
    ws: &mut Workspace,
) -> Result<SourceResult> {
    let lo = g.offsets()[source as usize];
    let nb = g.neighbors(source);
    let d_i = nb.len();
    let m = g.m();
    let taus: Vec<u32> = (0..d_i).map(|k| tau_of_edge[g.slot_edge(lo + k)]).collect();
    let inv_d_i = 1.0 / d_i as f64;
    let mut g_hat = vec![0.0; d_i];

    let n_walks = |depth: u32| -> u64 {
        taus.iter().fold(0u64, |acc, &t| {
            acc.saturating_add(walk_budget(t.saturating_sub(depth), config.epsilon, config.delta, d_i, m))
        })
    };
    let tau_tilde = propagate_landing_probabilities(
        g,
        source,
        n_walks,
        config.max_traversal_depth,
        &mut ws.landing,
        |depth, q| {
            let qi = q.get(source) * inv_d_i;
            for (k, &j) in nb.iter().enumerate() {
                if depth <= taus[k] {
                    let w = if depth == taus[k] { 0.5 } else { 1.0 };
                    g_hat[k] += w * (qi - q.get(j) / g.degree(j) as f64);
                }
            }
        },
    );

    let landing = ws.landing.current();
    let mut walks = 0;
    let mut walk_steps = 0;
    for (k, &j) in nb.iter().enumerate() {
        if taus[k] <= tau_tilde {
            continue;
        }
        let tail = taus[k] - tau_tilde;
        let n_req = walk_budget(tail, config.epsilon, config.delta, d_i, m);
        let edge_walks = EdgeWalks {
            plan: *plan,
            hash: config.hash,
            stream: rng::mix64(config.master_seed ^ rng::mix64((lo + k) as u64)),
        };
        g_hat[k] += estimate_edge(g, source, j, landing, tail, n_req, &edge_walks, &mut ws.scratch)?;
        walks += 2 * n_req;
        walk_steps += 2 * n_req * u64::from(tail);
    }
    Ok(SourceResult {
        g_hat,
        tau_tilde,
        walks,
        walk_steps,
    })
}

/// Approximates the spanning centrality of every edge.
///
/// Deterministic for a fixed configuration: walks are seeded by edge and
/// walk index, walk visits are integer counts and per-source results are
/// assembled in vertex order, so neither the thread count nor the walk order
/// (hash vs. saba) changes a single bit of the output.
pub fn aesc(g: &Graph, config: &AescConfig) -> Result<CentralityEstimate> {
    config.validate()?;
    if g.m() == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut plan = truncated_lengths(g, config.epsilon, config.omega, config.tau_max, config.per_edge_tau)?;
    let walk_plan = WalkPlan::new(config.mode, config.selector, config.lanes)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.max(1))
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let n = g.n();

    let started = Instant::now();
    let per_source: Vec<SourceResult> = pool.install(|| {
        (0..n as VertexId)
            .into_par_iter()
            .with_min_len(8)
            .map_init(
                || Workspace {
                    landing: LandingWorkspace::new(n),
                    scratch: WalkScratch::new(n),
                },
                |ws, source| estimate_source(g, source, config, &walk_plan, &plan.tau, ws),
            )
            .collect::<Result<Vec<_>>>()
    })?;
    let seconds = started.elapsed().as_secs_f64();

    let mut g_hat = Vec::with_capacity(2 * g.m());
    let mut walks = 0;
    let mut walk_steps = 0;
    plan.tau_tilde = Vec::with_capacity(n);
    for r in per_source {
        g_hat.extend_from_slice(&r.g_hat);
        plan.tau_tilde.push(r.tau_tilde);
        walks += r.walks;
        walk_steps += r.walk_steps;
    }
    let mut s_hat = vec![0.0; g.m()];
    for (slot, &gh) in g_hat.iter().enumerate() {
        s_hat[g.slot_edge(slot)] += gh;
    }
    Ok(CentralityEstimate {
        g_hat,
        s_hat,
        plan,
        config: config.clone(),
        walks,
        walk_steps,
        seconds,
    })
}

/// Exact spanning centrality per edge id, via the Laplacian pseudoinverse.
pub fn exact_sc(g: &Graph) -> Result<Vec<f64>> {
    exact_sc_with_limit(g, DEFAULT_EXACT_LIMIT)
}

/// [`exact_sc`] with an explicit vertex limit. Graphs up to
/// [`TREE_COUNT_LIMIT`] vertices are cross-checked against
/// `1 - T(G - e) / T(G)` computed with exact integer determinants.
pub fn exact_sc_with_limit(g: &Graph, limit: usize) -> Result<Vec<f64>> {
    let n = g.n();
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let resistances = effective_resistances(g)?;
    if n <= TREE_COUNT_LIMIT {
        let total = spanning_tree_count(g, None)?;
        for (id, &(u, v)) in g.edges().iter().enumerate() {
            let without = spanning_tree_count(g, Some(id))?;
            let ratio = 1.0 - without as f64 / total as f64;
            if (ratio - resistances[id]).abs() > 1e-9 {
                return Err(Error::OracleMismatch {
                    u,
                    v,
                    resistance: resistances[id],
                    tree_ratio: ratio,
                });
            }
        }
    }
    Ok(resistances)
}

fn effective_resistances(g: &Graph) -> Result<Vec<f64>> {
    let n = g.n();
    let shift = 1.0 / n as f64;
    // L + J/n is positive definite on a connected graph and its inverse is
    // L^+ + J/n; the J/n part cancels in every resistance.
    let mut lap = DMatrix::from_element(n, n, shift);
    for u in 0..n as VertexId {
        lap[(u as usize, u as usize)] += g.degree(u) as f64;
        for &v in g.neighbors(u) {
            lap[(u as usize, v as usize)] -= 1.0;
        }
    }
    let chol = lap
        .cholesky()
        .ok_or_else(|| Error::config("Laplacian factorization failed"))?;
    let inv = chol.inverse();
    Ok(g
        .edges()
        .iter()
        .map(|&(u, v)| {
            let (u, v) = (u as usize, v as usize);
            inv[(u, u)] + inv[(v, v)] - 2.0 * inv[(u, v)]
        })
        .collect())
}

/// Number of spanning trees, optionally with edge `without` deleted, by a
/// fraction-free (Bareiss) determinant of the reduced Laplacian.
pub fn spanning_tree_count(g: &Graph, without: Option<usize>) -> Result<u128> {
    let n = g.n();
    if n > TREE_COUNT_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: TREE_COUNT_LIMIT,
        });
    }
    if n == 1 {
        return Ok(1);
    }
    let k = n - 1;
    let mut a = vec![vec![0i128; k]; k];
    for (id, &(u, v)) in g.edges().iter().enumerate() {
        if Some(id) == without {
            continue;
        }
        let (u, v) = (u as usize, v as usize);
        for (x, y) in [(u, v), (v, u)] {
            if x < k {
                a[x][x] += 1;
                if y < k {
                    a[x][y] -= 1;
                }
            }
        }
    }
    let overflow = || Error::config("spanning tree count overflowed");
    let mut prev = 1i128;
    let mut sign = 1i128;
    for p in 0..k {
        if a[p][p] == 0 {
            match (p + 1..k).find(|&r| a[r][p] != 0) {
                Some(r) => {
                    a.swap(p, r);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in p + 1..k {
            for j in p + 1..k {
                let lhs = a[i][j].checked_mul(a[p][p]).ok_or_else(overflow)?;
                let rhs = a[i][p].checked_mul(a[p][j]).ok_or_else(overflow)?;
                a[i][j] = (lhs - rhs) / prev;
            }
        }
        prev = a[p][p];
    }
    let det = sign * a[k - 1][k - 1];
    u128::try_from(det).map_err(|_| overflow())
}
