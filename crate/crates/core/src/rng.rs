//! Stateless neighbor selection for random walks.
//!
//! A walk's choice at step `step` from vertex `cur` is a pure function of the
//! walk seed, `cur`, `step` and `degree(cur)`. Three selectors are provided:
//!
//! | kind       | raw word                    | index                        |
//! |------------|-----------------------------|------------------------------|
//! | `NaiveMod` | next word of a per-walk LCG | `raw % degree`               |
//! | `XorMod`   | `seed ^ h(cur, step)`       | `raw % degree`               |
//! | `Scaled`   | `seed ^ h(cur, step)`       | `(raw * degree) >> 32`       |
//!
//! `Scaled` never wraps around: it is monotone in the raw word, so walks whose
//! seeds are close pick the same neighbor. Sorting seeds before batching walks
//! into bouquets exploits exactly this.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::graph::{Graph, VertexId};
use crate::{Error, Result};

/// Exclusive upper bound of hash words.
pub const H_MAX: u64 = 1 << 32;

const MURMUR_M: u64 = 0xc6a4_a793_5bd1_e995;
const MURMUR_R: u32 = 47;

/// Default seed of the vertex/step hash.
pub const DEFAULT_HASH_SEED: u64 = 0x9747_b28c;

/// The state hash `h(cur, step)`.
///
/// MurmurHash64A over the single 64-bit block `cur << 32 | step`, folded to
/// 32 bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashSpec {
    pub seed: u64,
}

impl Default for HashSpec {
    fn default() -> Self {
        Self {
            seed: DEFAULT_HASH_SEED,
        }
    }
}

impl HashSpec {
    #[inline(always)]
    pub fn state(&self, vertex: VertexId, step: u32) -> u32 {
        let mut k = (u64::from(vertex) << 32) | u64::from(step);
        let mut h = self.seed ^ 8u64.wrapping_mul(MURMUR_M);
        k = k.wrapping_mul(MURMUR_M);
        k ^= k >> MURMUR_R;
        k = k.wrapping_mul(MURMUR_M);
        h ^= k;
        h = h.wrapping_mul(MURMUR_M);
        h ^= h >> MURMUR_R;
        h = h.wrapping_mul(MURMUR_M);
        h ^= h >> MURMUR_R;
        (h ^ (h >> 32)) as u32
    }
}

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Counter-based SplitMix64 stream. Used for graph generators and start vectors.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform-ish integer in `[0, bound)` by widening multiply.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(bound)) >> 64) as u64
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Seed of walk number `index` under `master_seed`.
#[inline]
pub fn walk_seed(master_seed: u64, index: u64) -> u32 {
    (mix64(mix64(master_seed) ^ index.wrapping_mul(GOLDEN_GAMMA)) >> 32) as u32
}

/// 64-bit LCG (Knuth's MMIX constants). The baseline raw-word source of the
/// naive selector; outputs the high half of the state.
#[derive(Debug, Clone, Copy)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub const MULTIPLIER: u64 = 6_364_136_223_846_793_005;
    pub const INCREMENT: u64 = 1_442_695_040_888_963_407;

    pub fn new(state: u64) -> Self {
        Self { state }
    }

    /// Per-walk generator derived from a walk seed.
    #[inline]
    pub fn from_walk_seed(seed: u32) -> Self {
        Self::new(mix64(u64::from(seed)))
    }

    #[inline(always)]
    pub fn next_u32(&mut self) -> u32 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        (self.state >> 32) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectorKind {
    NaiveMod,
    XorMod,
    Scaled,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 3] = [Self::NaiveMod, Self::XorMod, Self::Scaled];
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NaiveMod => "naive",
            Self::XorMod => "xor",
            Self::Scaled => "scaled",
        })
    }
}

impl FromStr for SelectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" | "mod" => Ok(Self::NaiveMod),
            "xor" => Ok(Self::XorMod),
            "scaled" => Ok(Self::Scaled),
            other => Err(Error::config(format!("unknown selector `{other}`"))),
        }
    }
}

/// `raw mod degree`. Panics when `degree == 0`.
#[inline]
pub fn select_mod(raw: u32, degree: u32) -> u32 {
    assert!(degree > 0, "cannot select a neighbor of an isolated vertex");
    raw % degree
}

/// `(seed ^ state) mod degree`. Panics when `degree == 0`.
#[inline]
pub fn select_xor_mod(seed: u32, state: u32, degree: u32) -> u32 {
    select_mod(seed ^ state, degree)
}

/// `floor((seed ^ state) * degree / 2^32)`, computed as the high half of a
/// widening multiply. Panics when `degree == 0`.
#[inline]
pub fn select_scaled(seed: u32, state: u32, degree: u32) -> u32 {
    assert!(degree > 0, "cannot select a neighbor of an isolated vertex");
    scale(seed ^ state, degree)
}

#[inline(always)]
pub(crate) fn scale(raw: u32, degree: u32) -> u32 {
    ((u64::from(raw) * u64::from(degree)) >> 32) as u32
}

/// Compile-time selector used by the walk kernels.
pub trait Selector: Copy + Send + Sync + 'static {
    const KIND: SelectorKind;
    type State: Copy + Send;

    fn init(seed: u32) -> Self::State;
    fn raw(state: &mut Self::State, hash: &HashSpec, cur: VertexId, step: u32) -> u32;
    /// Index into the neighbor slice; `degree` is nonzero.
    fn index(raw: u32, degree: u32) -> u32;
}

#[derive(Debug, Clone, Copy)]
pub struct NaiveMod;
#[derive(Debug, Clone, Copy)]
pub struct XorMod;
#[derive(Debug, Clone, Copy)]
pub struct Scaled;

impl Selector for NaiveMod {
    const KIND: SelectorKind = SelectorKind::NaiveMod;
    type State = Lcg64;

    #[inline(always)]
    fn init(seed: u32) -> Lcg64 {
        Lcg64::from_walk_seed(seed)
    }
    #[inline(always)]
    fn raw(state: &mut Lcg64, _: &HashSpec, _: VertexId, _: u32) -> u32 {
        state.next_u32()
    }
    #[inline(always)]
    fn index(raw: u32, degree: u32) -> u32 {
        raw % degree
    }
}

impl Selector for XorMod {
    const KIND: SelectorKind = SelectorKind::XorMod;
    type State = u32;

    #[inline(always)]
    fn init(seed: u32) -> u32 {
        seed
    }
    #[inline(always)]
    fn raw(seed: &mut u32, hash: &HashSpec, cur: VertexId, step: u32) -> u32 {
        *seed ^ hash.state(cur, step)
    }
    #[inline(always)]
    fn index(raw: u32, degree: u32) -> u32 {
        raw % degree
    }
}

impl Selector for Scaled {
    const KIND: SelectorKind = SelectorKind::Scaled;
    type State = u32;

    #[inline(always)]
    fn init(seed: u32) -> u32 {
        seed
    }
    #[inline(always)]
    fn raw(seed: &mut u32, hash: &HashSpec, cur: VertexId, step: u32) -> u32 {
        *seed ^ hash.state(cur, step)
    }
    #[inline(always)]
    fn index(raw: u32, degree: u32) -> u32 {
        scale(raw, degree)
    }
}

/// Per-walk seeds together with the walk ids they belong to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSet {
    seeds: Vec<u32>,
    walk_ids: Vec<u64>,
    sorted: bool,
    master_seed: u64,
}

impl SeedSet {
    /// Seeds of walks `first_id .. first_id + count`, in id order.
    pub fn generate(count: usize, master_seed: u64, first_id: u64) -> Self {
        let walk_ids: Vec<u64> = (first_id..first_id + count as u64).collect();
        let seeds = walk_ids.iter().map(|&id| walk_seed(master_seed, id)).collect();
        Self {
            seeds,
            walk_ids,
            sorted: false,
            master_seed,
        }
    }

    /// Builds a set from explicit seeds; walk ids are positions.
    pub fn from_seeds(seeds: Vec<u32>) -> Self {
        let walk_ids = (0..seeds.len() as u64).collect();
        Self {
            seeds,
            walk_ids,
            sorted: false,
            master_seed: 0,
        }
    }

    /// Reorders walks by ascending seed (ties by walk id).
    pub fn sort(&mut self) {
        let mut keyed: Vec<(u32, u64)> = self
            .seeds
            .iter()
            .copied()
            .zip(self.walk_ids.iter().copied())
            .collect();
        keyed.sort_unstable();
        for (k, (s, id)) in keyed.into_iter().enumerate() {
            self.seeds[k] = s;
            self.walk_ids[k] = id;
        }
        self.sorted = true;
    }

    pub fn sorted(mut self) -> Self {
        self.sort();
        self
    }

    pub fn seeds(&self) -> &[u32] {
        &self.seeds
    }

    pub fn walk_ids(&self) -> &[u64] {
        &self.walk_ids
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}

/// Sorts `(seed << 32) | tag` keys, whose tags ascend in input order, into
/// `(seed, tag)` order. `scratch` is reused between calls.
pub fn sort_keys_by_seed(keys: &mut Vec<u64>, scratch: &mut Vec<u64>) {
    if keys.len() < 64 {
        keys.sort_unstable();
        return;
    }
    // Stable byte-wise radix sort on the seed half.
    scratch.clear();
    scratch.resize(keys.len(), 0);
    for shift in [32u32, 40, 48, 56] {
        let mut counts = [0usize; 256];
        for &k in keys.iter() {
            counts[((k >> shift) & 0xff) as usize] += 1;
        }
        if counts.contains(&keys.len()) {
            continue;
        }
        let mut sum = 0;
        for c in counts.iter_mut() {
            let here = *c;
            *c = sum;
            sum += here;
        }
        for &k in keys.iter() {
            let digit = ((k >> shift) & 0xff) as usize;
            scratch[counts[digit]] = k;
            counts[digit] += 1;
        }
        std::mem::swap(keys, scratch);
    }
}

/// `count` walk seeds from `master_seed`, sorted ascending. Panics if `count == 0`.
pub fn gen_sorted_seeds(count: usize, master_seed: u64) -> SeedSet {
    assert!(count >= 1, "seed count must be positive");
    SeedSet::generate(count, master_seed, 0).sorted()
}

/// What [`rng_stream`] walks.
#[derive(Debug, Clone)]
pub struct StreamCampaign {
    /// Start vertices; `None` means every vertex in id order.
    pub starts: Option<Vec<VertexId>>,
    pub walks_per_vertex: usize,
    /// Vertices per walk; each walk contributes `length - 1` words.
    pub length: usize,
    pub selector: SelectorKind,
    pub master_seed: u64,
    pub hash: HashSpec,
}

/// Writes the raw pre-selection words of every walk, path by path, as
/// little-endian `u32`s. Walk `k` from vertex `v` uses the seed of walk id
/// `v * walks_per_vertex + k`, as the walk campaigns do. Returns the number
/// of words written.
pub fn rng_stream<W: Write>(g: &Graph, campaign: &StreamCampaign, out: &mut W) -> Result<u64> {
    match campaign.selector {
        SelectorKind::NaiveMod => stream_words::<NaiveMod, W>(g, campaign, out),
        SelectorKind::XorMod => stream_words::<XorMod, W>(g, campaign, out),
        SelectorKind::Scaled => stream_words::<Scaled, W>(g, campaign, out),
    }
}

fn stream_words<S: Selector, W: Write>(
    g: &Graph,
    campaign: &StreamCampaign,
    out: &mut W,
) -> Result<u64> {
    if campaign.length == 0 || campaign.walks_per_vertex == 0 {
        return Err(Error::config("walk count and length must be positive"));
    }
    let all: Vec<VertexId>;
    let starts = match &campaign.starts {
        Some(s) => s.as_slice(),
        None => {
            all = (0..g.n() as VertexId).collect();
            &all
        }
    };
    let k = campaign.walks_per_vertex as u64;
    let mut buf = Vec::with_capacity(4 * (campaign.length - 1).max(1));
    let mut words = 0u64;
    for &v in starts {
        if v as usize >= g.n() {
            return Err(Error::config(format!("start vertex {v} out of range")));
        }
        for w in 0..k {
            let mut state = S::init(walk_seed(campaign.master_seed, u64::from(v) * k + w));
            let mut cur = v;
            buf.clear();
            for step in 1..campaign.length as u32 {
                let nb = g.neighbors(cur);
                if nb.is_empty() {
                    return Err(Error::IsolatedVertex(cur));
                }
                let raw = S::raw(&mut state, &campaign.hash, cur, step);
                buf.extend_from_slice(&raw.to_le_bytes());
                cur = nb[S::index(raw, nb.len() as u32) as usize];
            }
            out.write_all(&buf)?;
            words += (campaign.length - 1) as u64;
        }
    }
    out.flush()?;
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators;
    use proptest::prelude::*;

    #[test]
    fn select_mod_examples() {
        assert_eq!(select_mod(10, 3), 1);
        assert_eq!(select_mod(0, 7), 0);
        assert_eq!(select_mod(u32::MAX, 2), 1);
    }

    #[test]
    fn select_xor_mod_examples() {
        assert_eq!(select_xor_mod(0b1010, 0b0110, 5), 2);
        for d in 1..20 {
            assert_eq!(select_xor_mod(0xdead_beef, 0xdead_beef, d), 0);
        }
        let h = HashSpec::default().state(17, 3);
        assert_eq!(select_xor_mod(0, h, 9), h % 9);
    }

    #[test]
    fn select_scaled_examples() {
        assert_eq!(select_scaled(0, 0, 5), 0);
        assert_eq!(select_scaled(u32::MAX, 0, 5), 4);
        assert_eq!(select_scaled(0x8000_0000, 0, 2), 1);
        assert_eq!(select_scaled(0x7fff_ffff, 0, 2), 0);
    }

    #[test]
    #[should_panic(expected = "isolated")]
    fn zero_degree_is_a_contract_violation() {
        select_scaled(1, 2, 0);
    }

    #[test]
    #[should_panic(expected = "isolated")]
    fn zero_degree_mod_is_a_contract_violation() {
        select_mod(1, 0);
    }

    #[test]
    fn hash_is_pure_and_step_sensitive() {
        let h = HashSpec::default();
        assert_eq!(h.state(5, 1), h.state(5, 1));
        assert_ne!(h.state(5, 1), h.state(5, 2));
        assert_ne!(h.state(5, 1), h.state(6, 1));
        assert_ne!(HashSpec { seed: 1 }.state(5, 1), h.state(5, 1));
    }

    #[test]
    fn hash_avalanche() {
        let h = HashSpec::default();
        let mut rng = SplitMix64::new(11);
        let (mut flipped, mut total) = (0u64, 0u64);
        for _ in 0..20_000 {
            let v = rng.next_u64() as u32;
            let s = rng.next_u64() as u32;
            let bit = rng.below(64) as u32;
            let key = (u64::from(v) << 32 | u64::from(s)) ^ (1u64 << bit);
            let (v2, s2) = ((key >> 32) as u32, key as u32);
            flipped += u64::from((h.state(v, s) ^ h.state(v2, s2)).count_ones());
            total += 32;
        }
        let ratio = flipped as f64 / total as f64;
        assert!((0.4..=0.6).contains(&ratio), "avalanche ratio {ratio}");
    }

    #[test]
    fn radix_sort_matches_comparison_sort() {
        let mut scratch = Vec::new();
        for len in [0usize, 1, 5, 63, 64, 65, 1000, 5000] {
            let mut rng = SplitMix64::new(len as u64);
            let mut keys: Vec<u64> = (0..len as u64)
                .map(|i| (u64::from(rng.next_u64() as u32 % 700) << 32) | i)
                .collect();
            let mut expected = keys.clone();
            expected.sort_unstable();
            sort_keys_by_seed(&mut keys, &mut scratch);
            assert_eq!(keys, expected);
        }
    }

    #[test]
    fn sorted_seeds() {
        let one = gen_sorted_seeds(1, 3);
        assert_eq!(one.len(), 1);
        assert!(one.is_sorted());
        let many = gen_sorted_seeds(10_000, 99);
        assert!(many.seeds().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(gen_sorted_seeds(500, 5), gen_sorted_seeds(500, 5));
        // Sorting permutes, never changes, the seed multiset.
        let raw = SeedSet::generate(500, 5, 0);
        let mut a = raw.seeds().to_vec();
        a.sort_unstable();
        assert_eq!(a, gen_sorted_seeds(500, 5).seeds());
        for (s, id) in gen_sorted_seeds(500, 5).seeds().iter().zip(gen_sorted_seeds(500, 5).walk_ids()) {
            assert_eq!(*s, walk_seed(5, *id));
        }
    }

    #[test]
    #[should_panic]
    fn zero_seeds_is_a_contract_violation() {
        gen_sorted_seeds(0, 1);
    }

    #[test]
    fn xor_mod_wraps_but_scaled_does_not() {
        let d = 7;
        let scaled: Vec<u32> = (0..4096u32).map(|i| select_scaled(i << 20, 0, d)).collect();
        assert!(scaled.windows(2).all(|w| w[0] <= w[1]));
        let modded: Vec<u32> = (0..4096u32).map(|i| select_xor_mod(i << 20, 0, d)).collect();
        assert!(modded.windows(2).any(|w| w[0] > w[1]));
    }

    #[test]
    fn neighboring_seeds_cluster_under_scaled_selection() {
        let h = HashSpec::default();
        let mut rng = SplitMix64::new(4);
        for d in 1..=16u32 {
            let width = H_MAX / u64::from(d);
            for _ in 0..2_000 {
                let seed = rng.next_u64() as u32 & !1;
                let state = h.state(rng.next_u64() as u32, rng.below(16) as u32);
                let a = select_scaled(seed, state, d);
                let b = select_scaled(seed | 1, state, d);
                if a != b {
                    let x = u64::from(seed ^ state);
                    let boundary = u64::from(a.max(b)) * H_MAX / u64::from(d);
                    assert!(x.abs_diff(boundary) <= width, "d={d} x={x}");
                }
            }
        }
    }

    #[test]
    fn stream_word_counts_and_determinism() {
        let g = generators::diamond();
        let campaign = StreamCampaign {
            starts: Some(vec![0]),
            walks_per_vertex: 1,
            length: 2,
            selector: SelectorKind::Scaled,
            master_seed: 7,
            hash: HashSpec::default(),
        };
        let mut out = Vec::new();
        assert_eq!(rng_stream(&g, &campaign, &mut out).unwrap(), 1);
        assert_eq!(out.len(), 4);

        for selector in SelectorKind::ALL {
            let c = StreamCampaign {
                starts: None,
                walks_per_vertex: 100,
                length: 5,
                selector,
                ..campaign.clone()
            };
            let (mut a, mut b) = (Vec::new(), Vec::new());
            assert_eq!(rng_stream(&g, &c, &mut a).unwrap(), 4 * 100 * 4);
            rng_stream(&g, &c, &mut b).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 4 * 100 * 4 * 4);
        }
    }

    #[test]
    fn stream_words_are_pre_selection_values() {
        let g = generators::diamond();
        let hash = HashSpec::default();
        let campaign = StreamCampaign {
            starts: Some(vec![0]),
            walks_per_vertex: 1,
            length: 3,
            selector: SelectorKind::Scaled,
            master_seed: 7,
            hash,
        };
        let mut out = Vec::new();
        rng_stream(&g, &campaign, &mut out).unwrap();
        let seed = walk_seed(7, 0);
        let w0 = u32::from_le_bytes(out[0..4].try_into().unwrap());
        assert_eq!(w0, seed ^ hash.state(0, 1));
        let next = g.neighbors(0)[select_scaled(seed, hash.state(0, 1), 2) as usize];
        let w1 = u32::from_le_bytes(out[4..8].try_into().unwrap());
        assert_eq!(w1, seed ^ hash.state(next, 2));
    }

    struct FailingSink;
    impl Write for FailingSink {
        fn write(&mut self, _: &[u8]) -> std::io::Result<usize> {
            Err(std::io::Error::other("sink closed"))
        }
        fn flush(&mut self) -> std::io::Result<()> {
            Ok(())
        }
    }

    #[test]
    fn stream_sink_failure_is_io_error() {
        let campaign = StreamCampaign {
            starts: None,
            walks_per_vertex: 2,
            length: 4,
            selector: SelectorKind::XorMod,
            master_seed: 1,
            hash: HashSpec::default(),
        };
        let err = rng_stream(&generators::diamond(), &campaign, &mut FailingSink).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }

    proptest! {
        #[test]
        fn selectors_stay_in_range(raw in any::<u32>(), state in any::<u32>(), degree in 1u32..=(1 << 20)) {
            prop_assert!(select_mod(raw, degree) < degree);
            prop_assert!(select_xor_mod(raw, state, degree) < degree);
            prop_assert!(select_scaled(raw, state, degree) < degree);
        }

        #[test]
        fn scaled_is_monotone(a in any::<u32>(), b in any::<u32>(), degree in 1u32..100_000) {
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(select_scaled(lo, 0, degree) <= select_scaled(hi, 0, degree));
        }
    }
}
