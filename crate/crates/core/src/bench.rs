//! Benchmark harness: walk campaigns and AESC runs over a parameter grid,
//! plus the distinct-sample model used to read branching statistics.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::aesc::{self, AescConfig};
use crate::graph::Graph;
use crate::rng::{HashSpec, SelectorKind};
use crate::walker::{self, CampaignConfig, VisitCounter, WalkerMode, DEFAULT_LANES};
use crate::{Error, Result};

pub use crate::walker::BranchingStats;

/// Runs shorter than this are timed in batches.
pub const MIN_TIMED: Duration = Duration::from_millis(1);
const MAX_BATCH: usize = 1 << 12;

/// Expected fraction of distinct values among `alpha` uniform draws from
/// `beta` bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinctRatio {
    /// `beta / alpha * (1 - (1 - 1/beta)^alpha)`.
    pub exact: f64,
    /// `beta / alpha * (1 - exp(-alpha / beta))`.
    pub exponential: f64,
}

pub fn expected_distinct_ratio(alpha: u32, beta: f64) -> DistinctRatio {
    assert!(alpha >= 1 && beta >= 1.0, "need alpha >= 1 and beta >= 1");
    let a = f64::from(alpha);
    // ln1p keeps (1 - 1/beta)^alpha accurate for huge beta.
    let exact = beta / a * -(a * (-1.0 / beta).ln_1p()).exp_m1();
    let exponential = beta / a * -(-a / beta).exp_m1();
    DistinctRatio { exact, exponential }
}

/// Bin count whose exact expected distinct count of `lanes` draws is `mean`.
/// `None` if `mean` is at (or numerically indistinguishable from) `lanes`.
pub fn estimate_bins(mean: f64, lanes: usize) -> Option<f64> {
    let a = lanes as f64;
    if lanes <= 1 || mean >= a - 1e-9 {
        return None;
    }
    if mean <= 1.0 {
        return Some(1.0);
    }
    let distinct = |beta: f64| a * expected_distinct_ratio(lanes as u32, beta).exact;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while distinct(hi) < mean {
        hi *= 2.0;
        if hi > 1e15 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if distinct(mid) < mean {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Distinct lane vertices summed over bouquet steps: a software stand-in for
/// cache misses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistinctProxy {
    pub total: u64,
    pub per_step: Vec<u64>,
}

pub fn distinct_access_proxy(stats: &BranchingStats) -> DistinctProxy {
    DistinctProxy {
        total: stats.distinct_total(),
        per_step: stats.per_step_distinct.clone(),
    }
}

/// Branching statistics of a campaign (untimed).
pub fn campaign_branching(g: &Graph, config: &CampaignConfig) -> Result<BranchingStats> {
    if !config.mode.is_batched() {
        return Err(Error::config("branching statistics need a lane-batched mode"));
    }
    let mut sink = VisitCounter::new(g.n());
    let cfg = CampaignConfig {
        collect_branching: true,
        ..config.clone()
    };
    walker::run_walk_campaign(g, &cfg, &mut sink)?
        .branching
        .ok_or(Error::EmptyTrace)
}

/// Proxy of `config`'s mode next to the unsorted-hash proxy of the identical
/// walk set.
pub fn proxy_against_hash(g: &Graph, config: &CampaignConfig) -> Result<(DistinctProxy, DistinctProxy)> {
    let own = distinct_access_proxy(&campaign_branching(g, config)?);
    let hash_cfg = CampaignConfig {
        mode: WalkerMode::Hash,
        ..config.clone()
    };
    let hash = distinct_access_proxy(&campaign_branching(g, &hash_cfg)?);
    Ok((own, hash))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Synthetic,
    Aesc,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Synthetic => "synthetic",
            Self::Aesc => "aesc",
        })
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synthetic" => Ok(Self::Synthetic),
            "aesc" => Ok(Self::Aesc),
            _ => Err(Error::config(format!("unknown experiment {s:?} (synthetic, aesc)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub graph: PathBuf,
    pub experiment: Experiment,
    pub modes: Vec<WalkerMode>,
    pub walks_per_vertex: Vec<usize>,
    pub lengths: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub threads: Vec<usize>,
    pub lanes: usize,
    pub selector: Option<SelectorKind>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub hash: HashSpec,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            graph: PathBuf::new(),
            experiment: Experiment::Synthetic,
            modes: WalkerMode::ALL.to_vec(),
            walks_per_vertex: vec![2048],
            lengths: vec![10],
            epsilons: vec![0.05],
            threads: vec![1],
            lanes: DEFAULT_LANES,
            selector: None,
            repetitions: 3,
            master_seed: 0x5eed,
            hash: HashSpec::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let empty = |name: &str| Error::config(format!("benchmark needs at least one {name}"));
        if self.modes.is_empty() {
            return Err(empty("mode"));
        }
        if self.threads.is_empty() {
            return Err(empty("thread count"));
        }
        match self.experiment {
            Experiment::Synthetic => {
                if self.walks_per_vertex.is_empty() {
                    return Err(empty("walk count"));
                }
                if self.lengths.is_empty() {
                    return Err(empty("walk length"));
                }
            }
            Experiment::Aesc if self.epsilons.is_empty() => return Err(empty("epsilon")),
            Experiment::Aesc => {}
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions must be positive"));
        }
        Ok(())
    }
}

/// One configuration point of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub graph: String,
    pub experiment: Experiment,
    pub mode: WalkerMode,
    pub walks_per_vertex: Option<usize>,
    pub length: Option<usize>,
    pub epsilon: Option<f64>,
    pub threads: usize,
    pub lanes: usize,
    /// Timed repetitions, in run order.
    pub seconds: Vec<f64>,
    pub seconds_median: f64,
    /// Neighbor selections per run.
    pub steps: u64,
    pub steps_per_sec: f64,
    pub speedup_vs_naive: Option<f64>,
    pub branching: Option<BranchingStats>,
    pub distinct_proxy: Option<u64>,
    /// Proxy of the unsorted-hash mode on the same walks.
    pub hash_distinct_proxy: Option<u64>,
    /// Fingerprint of the run's output (visit counts or estimates).
    pub checksum: u64,
}

impl BenchRow {
    /// `RESULT key=value ...`.
    pub fn result_line(&self) -> String {
        fn opt<T: fmt::Display>(v: Option<T>) -> String {
            v.map_or_else(|| "na".to_string(), |v| v.to_string())
        }
        let b = self.branching.as_ref();
        let mut s = String::from("RESULT");
        let _ = write!(
            s,
            " graph={} experiment={} mode={} K={} L={} eps={} threads={} lanes={} reps={}",
            self.graph,
            self.experiment,
            self.mode,
            opt(self.walks_per_vertex),
            opt(self.length),
            opt(self.epsilon),
            self.threads,
            self.lanes,
            self.seconds.len()
        );
        let _ = write!(
            s,
            " seconds_median={:.6e} steps={} steps_per_sec={:.6e} speedup_vs_naive={}",
            self.seconds_median,
            self.steps,
            self.steps_per_sec,
            opt(self.speedup_vs_naive.map(|x| format!("{x:.4}")))
        );
        let _ = write!(
            s,
            " branch_p1={} branch_p10={} branch_p25={} branch_mean={} beta_hat={} distinct_proxy={} hash_distinct_proxy={} checksum={:016x}",
            opt(b.map(|b| b.p1)),
            opt(b.map(|b| b.p10)),
            opt(b.map(|b| b.p25)),
            opt(b.map(|b| format!("{:.4}", b.mean))),
            opt(b.and_then(|b| b.beta_hat).map(|x| format!("{x:.2}"))),
            opt(self.distinct_proxy),
            opt(self.hash_distinct_proxy),
            self.checksum
        );
        s
    }

    /// The row with timing fields cleared, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            seconds: Vec::new(),
            seconds_median: 0.0,
            steps_per_sec: 0.0,
            speedup_vs_naive: None,
            ..self.clone()
        }
    }
}

/// A labelled instant, relative to the start of [`run_benchmark`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMark {
    pub label: String,
    pub at: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub phases: Vec<PhaseMark>,
    pub graph_vertices: usize,
    pub graph_edges: usize,
    pub warnings: Vec<String>,
}

impl BenchReport {
    pub fn result_lines(&self) -> String {
        self.rows.iter().map(|r| r.result_line() + "\n").collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("graph: {} vertices, {} edges\n", self.graph_vertices, self.graph_edges);
        let _ = writeln!(
            s,
            "{:<11} {:>6} {:>4} {:>7} {:>4} {:>12} {:>12} {:>8} {:>6} {:>6} {:>6} {:>7}",
            "mode", "K", "L", "eps", "thr", "median_s", "steps/s", "speedup", "p1", "p10", "p25", "mean"
        );
        for r in &self.rows {
            let dash = || "-".to_string();
            let b = r.branching.as_ref();
            let _ = writeln!(
                s,
                "{:<11} {:>6} {:>4} {:>7} {:>4} {:>12.6} {:>12.4e} {:>8} {:>6} {:>6} {:>6} {:>7}",
                r.mode.to_string(),
                r.walks_per_vertex.map_or_else(dash, |x| x.to_string()),
                r.length.map_or_else(dash, |x| x.to_string()),
                r.epsilon.map_or_else(dash, |x| x.to_string()),
                r.threads,
                r.seconds_median,
                r.steps_per_sec,
                r.speedup_vs_naive.map_or_else(dash, |x| format!("{x:.2}x")),
                b.map_or_else(dash, |b| b.p1.to_string()),
                b.map_or_else(dash, |b| b.p10.to_string()),
                b.map_or_else(dash, |b| b.p25.to_string()),
                b.map_or_else(dash, |b| format!("{:.3}", b.mean)),
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

/// Loads `config.graph` and runs the grid. Loading is outside every timed
/// region; the `load-end` mark precedes every `timed-start` mark.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let origin = Instant::now();
    let mut phases = vec![mark("load-start", origin)];
    let g = Graph::load_path(&config.graph)?;
    phases.push(mark("load-end", origin));
    let name = config
        .graph
        .file_stem()
        .map_or_else(|| "graph".to_string(), |s| s.to_string_lossy().into_owned());
    let mut report = run_benchmark_on(&g, &name, config)?;
    for p in &mut report.phases {
        p.at += phases[1].at;
    }
    phases.append(&mut report.phases);
    report.phases = phases;
    Ok(report)
}

/// Runs the grid on an already loaded graph.
pub fn run_benchmark_on(g: &Graph, name: &str, config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let origin = Instant::now();
    let mut report = BenchReport {
        rows: Vec::new(),
        phases: Vec::new(),
        graph_vertices: g.n(),
        graph_edges: g.m(),
        warnings: Vec::new(),
    };
    match config.experiment {
        Experiment::Synthetic => {
            for &k in &config.walks_per_vertex {
                for &length in &config.lengths {
                    for &threads in &config.threads {
                        let first = report.rows.len();
                        for &mode in &config.modes {
                            let row = synthetic_row(g, name, config, mode, k, length, threads, origin, &mut report)?;
                            report.rows.push(row);
                        }
                        fill_speedups(&mut report.rows[first..]);
                    }
                }
            }
        }
        Experiment::Aesc => {
            for &eps in &config.epsilons {
                for &threads in &config.threads {
                    let first = report.rows.len();
                    for &mode in &config.modes {
                        let row = aesc_row(g, name, config, mode, eps, threads, origin, &mut report)?;
                        report.rows.push(row);
                    }
                    fill_speedups(&mut report.rows[first..]);
                }
            }
        }
    }
    Ok(report)
}

fn mark(label: &str, origin: Instant) -> PhaseMark {
    PhaseMark {
        label: label.to_string(),
        at: origin.elapsed(),
    }
}

fn fill_speedups(rows: &mut [BenchRow]) {
    let naive = rows
        .iter()
        .find(|r| r.mode == WalkerMode::Naive)
        .map(|r| r.seconds_median);
    for r in rows {
        r.speedup_vs_naive = naive.filter(|_| r.seconds_median > 0.0).map(|t| t / r.seconds_median);
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn fingerprint(words: impl IntoIterator<Item = u64>) -> u64 {
    words
        .into_iter()
        .fold(0x6a09_e667_f3bc_c908, |h, w| crate::rng::mix64(h ^ w).rotate_left(7))
}

/// Times `run` in `reps` (at least 3) samples. A run shorter than
/// [`MIN_TIMED`] is batched: each sample then times enough back-to-back runs
/// to exceed it and records the per-run mean.
fn time_reps<T>(
    reps: usize,
    label: &str,
    origin: Instant,
    report: &mut BenchReport,
    mut run: impl FnMut() -> Result<T>,
) -> Result<(Vec<f64>, T)> {
    report.phases.push(mark(&format!("timed-start:{label}"), origin));
    let t = Instant::now();
    let mut last = run()?;
    let probe = t.elapsed();
    let batch = if probe >= MIN_TIMED {
        1
    } else {
        let per_run = probe.as_secs_f64().max(1e-9);
        ((MIN_TIMED.as_secs_f64() / per_run).ceil() as usize).clamp(2, MAX_BATCH)
    };
    if batch > 1 {
        report
            .warnings
            .push(format!("{label}: run below timer resolution; timing batches of {batch}"));
    }
    let mut seconds = Vec::with_capacity(reps.max(3));
    for _ in 0..reps.max(3) {
        let t = Instant::now();
        for _ in 0..batch {
            last = run()?;
        }
        seconds.push(t.elapsed().as_secs_f64() / batch as f64);
    }
    report.phases.push(mark(&format!("timed-end:{label}"), origin));
    Ok((seconds, last))
}

#[allow(clippy::too_many_arguments)]
fn synthetic_row(
    g: &Graph,
    name: &str,
    config: &BenchConfig,
    mode: WalkerMode,
    k: usize,
    length: usize,
    threads: usize,
    origin: Instant,
    report: &mut BenchReport,
) -> Result<BenchRow> {
    let campaign = CampaignConfig {
        walks_per_vertex: k,
        length,
        mode,
        selector: config.selector,
        lanes: config.lanes,
        threads,
        master_seed: config.master_seed,
        hash: config.hash,
        collect_branching: false,
    };
    let label = format!("synthetic/{mode}/K{k}/L{length}/t{threads}");
    let (seconds, (steps, checksum)) = time_reps(config.repetitions, &label, origin, report, || {
        let mut sink = VisitCounter::new(g.n());
        let r = walker::run_walk_campaign(g, &campaign, &mut sink)?;
        Ok((r.total_steps, fingerprint(sink.counts().iter().copied())))
    })?;
    let (branching, distinct_proxy, hash_distinct_proxy) = if mode.is_batched() && length > 1 {
        let stats = campaign_branching(g, &campaign)?;
        let proxy = distinct_access_proxy(&stats).total;
        let hash_proxy = if mode == WalkerMode::Hash {
            proxy
        } else {
            let hash_cfg = CampaignConfig {
                mode: WalkerMode::Hash,
                ..campaign.clone()
            };
            distinct_access_proxy(&campaign_branching(g, &hash_cfg)?).total
        };
        (Some(stats), Some(proxy), Some(hash_proxy))
    } else {
        (None, None, None)
    };
    let seconds_median = median(&seconds);
    Ok(BenchRow {
        graph: name.to_string(),
        experiment: Experiment::Synthetic,
        mode,
        walks_per_vertex: Some(k),
        length: Some(length),
        epsilon: None,
        threads,
        lanes: config.lanes,
        seconds,
        seconds_median,
        steps,
        steps_per_sec: steps as f64 / seconds_median,
        speedup_vs_naive: None,
        branching,
        distinct_proxy,
        hash_distinct_proxy,
        checksum,
    })
}

#[allow(clippy::too_many_arguments)]
fn aesc_row(
    g: &Graph,
    name: &str,
    config: &BenchConfig,
    mode: WalkerMode,
    epsilon: f64,
    threads: usize,
    origin: Instant,
    report: &mut BenchReport,
) -> Result<BenchRow> {
    let cfg = AescConfig {
        epsilon,
        mode,
        selector: config.selector,
        lanes: config.lanes,
        threads,
        master_seed: config.master_seed,
        hash: config.hash,
        ..AescConfig::default()
    };
    let label = format!("aesc/{mode}/eps{epsilon}/t{threads}");
    let (seconds, (steps, checksum)) = time_reps(config.repetitions, &label, origin, report, || {
        let est = aesc::aesc(g, &cfg)?;
        Ok((est.walk_steps, fingerprint(est.s_hat.iter().map(|x| x.to_bits()))))
    })?;
    let seconds_median = median(&seconds);
    Ok(BenchRow {
        graph: name.to_string(),
        experiment: Experiment::Aesc,
        mode,
        walks_per_vertex: None,
        length: None,
        epsilon: Some(epsilon),
        threads,
        lanes: config.lanes,
        seconds,
        seconds_median,
        steps,
        steps_per_sec: if seconds_median > 0.0 { steps as f64 / seconds_median } else { 0.0 },
        speedup_vs_naive: None,
        branching: None,
        distinct_proxy: None,
        hash_distinct_proxy: None,
        checksum,
    })
}
