//! Immutable undirected graphs in compressed sparse row form.
//!
//! Every undirected edge `{u, v}` is stored twice, once in each endpoint's
//! neighbor slice. Neighbor slices are sorted ascending and duplicate-free,
//! which makes `neighbors(u)[k]` a stable, platform-independent index for the
//! neighbor selectors in [`crate::rng`].

pub mod generators;

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::{Error, Result};

/// Dense vertex id in `[0, n)`.
pub type VertexId = u32;

/// Options for [`Graph::load_edge_list`].
#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Lines whose first non-blank character is one of these are skipped.
    pub comment_chars: Vec<char>,
    /// Accept and ignore tokens after the first two on a line (e.g. weights or timestamps).
    pub allow_extra_columns: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            comment_chars: vec!['#', '%'],
            allow_extra_columns: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    adjacency: Vec<VertexId>,
    /// Edge id of every adjacency slot.
    slot_edge: Vec<u32>,
    /// Canonical edges `(u, v)` with `u < v`, sorted; the position is the edge id.
    edges: Vec<(VertexId, VertexId)>,
    /// Input label of every dense vertex id.
    labels: Vec<u64>,
}

impl Graph {
    /// Builds a graph over vertices `0..n` from an edge iterator.
    ///
    /// Self-loops are dropped and duplicates (in either direction) merged.
    /// Vertices without edges are allowed here, unlike in loaded edge lists.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if n > u32::MAX as usize {
            return Err(Error::config("vertex count exceeds 32-bit ids"));
        }
        let mut canon = Vec::new();
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::config(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{n}"
                )));
            }
            if u != v {
                canon.push((u.min(v), u.max(v)));
            }
        }
        canon.sort_unstable();
        canon.dedup();
        if canon.len() > u32::MAX as usize {
            return Err(Error::config("edge count exceeds 32-bit edge ids"));
        }

        let mut degree = vec![0usize; n];
        for &(u, v) in &canon {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut adjacency = vec![0; 2 * canon.len()];
        let mut slot_edge = vec![0; 2 * canon.len()];
        // Canonical edges are sorted by (u, v), so filling in this order leaves
        // every neighbor slice sorted: the lower endpoints of edges into `v`
        // arrive before its higher endpoints, each group ascending.
        for (id, &(u, v)) in canon.iter().enumerate() {
            let (u, v) = (u as usize, v as usize);
            adjacency[cursor[v]] = u as VertexId;
            slot_edge[cursor[v]] = id as u32;
            cursor[v] += 1;
        }
        for (id, &(u, v)) in canon.iter().enumerate() {
            let (u, _) = (u as usize, v);
            adjacency[cursor[u]] = v;
            slot_edge[cursor[u]] = id as u32;
            cursor[u] += 1;
        }

        Ok(Self {
            offsets,
            adjacency,
            slot_edge,
            edges: canon,
            labels: (0..n as u64).collect(),
        })
    }

    /// Parses a SNAP-style whitespace-separated edge list.
    ///
    /// Vertex labels are remapped to dense ids in order of first appearance.
    /// Self-loop lines neither add edges nor introduce vertices.
    pub fn load_edge_list<R: BufRead>(reader: R, options: &LoadOptions) -> Result<Self> {
        let mut ids: HashMap<u64, VertexId> = HashMap::new();
        let mut labels = Vec::new();
        let mut raw = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with(options.comment_chars.as_slice()) {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let mut next_id = || -> Result<u64> {
                let tok = tokens.next().ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: "expected two vertex ids".into(),
                })?;
                tok.parse::<u64>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("`{tok}` is not a non-negative integer vertex id"),
                })
            };
            let a = next_id()?;
            let b = next_id()?;
            if !options.allow_extra_columns && tokens.next().is_some() {
                return Err(Error::Parse {
                    line: lineno,
                    message: "more than two columns".into(),
                });
            }
            if a == b {
                continue;
            }
            let mut intern = |label: u64| {
                *ids.entry(label).or_insert_with(|| {
                    labels.push(label);
                    (labels.len() - 1) as VertexId
                })
            };
            let u = intern(a);
            let v = intern(b);
            raw.push((u, v));
        }
        if raw.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut g = Self::from_edges(labels.len(), raw)?;
        g.labels = labels;
        Ok(g)
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path)?;
        Self::load_edge_list(BufReader::new(file), &LoadOptions::default())
    }

    /// Writes the graph as an edge list using the input labels.
    ///
    /// Edges are ordered so that labels first appear in dense-id order, so
    /// reloading the output reproduces an identical graph.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.n();
        let mut written = vec![false; self.m()];
        let mut seen = vec![false; n];
        let emit = |out: &mut W, written: &mut [bool], id: usize, a: VertexId, b: VertexId| -> Result<()> {
            written[id] = true;
            writeln!(out, "{}\t{}", self.labels[a as usize], self.labels[b as usize])?;
            Ok(())
        };
        for v in 0..n as VertexId {
            if seen[v as usize] || self.degree(v) == 0 {
                continue;
            }
            let slot = self.offsets[v as usize];
            // Smallest neighbor: either already introduced, or the partner
            // that was introduced on the same input line.
            let u = self.adjacency[slot];
            let id = self.slot_edge[slot] as usize;
            if u < v {
                emit(&mut out, &mut written, id, u, v)?;
            } else {
                emit(&mut out, &mut written, id, v, u)?;
                seen[u as usize] = true;
            }
            seen[v as usize] = true;
        }
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            if !written[id] {
                emit(&mut out, &mut written, id, u, v)?;
            }
        }
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn degree(&self, u: VertexId) -> usize {
        let u = u as usize;
        self.offsets[u + 1] - self.offsets[u]
    }

    /// Sorted neighbor slice of `u`. Panics if `u >= n`.
    #[inline]
    pub fn neighbors(&self, u: VertexId) -> &[VertexId] {
        assert!((u as usize) < self.n(), "vertex {u} out of range 0..{}", self.n());
        let u = u as usize;
        &self.adjacency[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    #[inline]
    pub fn adjacency(&self) -> &[VertexId] {
        &self.adjacency
    }

    /// Canonical `(u, v)` pairs, `u < v`, indexed by edge id.
    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// Edge id stored at adjacency slot `slot`.
    #[inline]
    pub fn slot_edge(&self, slot: usize) -> usize {
        self.slot_edge[slot] as usize
    }

    /// Adjacency slot of `v` inside `u`'s neighbor slice.
    pub fn slot(&self, u: VertexId, v: VertexId) -> Option<usize> {
        self.neighbors(u)
            .binary_search(&v)
            .ok()
            .map(|k| self.offsets[u as usize] + k)
    }

    pub fn edge_id(&self, u: VertexId, v: VertexId) -> Option<usize> {
        self.slot(u, v).map(|s| self.slot_edge(s))
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.slot(u, v).is_some()
    }

    /// Input label of a dense vertex id.
    pub fn label(&self, u: VertexId) -> u64 {
        self.labels[u as usize]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n() as VertexId).map(|u| self.degree(u)).max().unwrap_or(0)
    }

    /// Breadth-first reachability from vertex 0.
    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::new();
        let mut components = 0;
        for s in 0..self.n() {
            if seen[s] {
                continue;
            }
            components += 1;
            seen[s] = true;
            queue.push_back(s as VertexId);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        components
    }

    /// Two-coloring (`+1` / `-1` per vertex) if the graph is bipartite.
    pub fn bipartition(&self) -> Option<Vec<i8>> {
        let mut side = vec![0i8; self.n()];
        let mut queue = VecDeque::new();
        for s in 0..self.n() {
            if side[s] != 0 {
                continue;
            }
            side[s] = 1;
            queue.push_back(s as VertexId);
            while let Some(u) = queue.pop_front() {
                let su = side[u as usize];
                for &v in self.neighbors(u) {
                    match side[v as usize] {
                        0 => {
                            side[v as usize] = -su;
                            queue.push_back(v);
                        }
                        sv if sv == su => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn load(s: &str) -> Result<Graph> {
        Graph::load_edge_list(s.as_bytes(), &LoadOptions::default())
    }

    #[test]
    fn path_graph_loads() {
        let g = load("0 1\n1 2").unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.neighbors(0), &[1]);
    }

    #[test]
    fn duplicates_and_self_loops_are_merged() {
        let g = load("0 1\n1 0\n0 0").unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
    }

    #[test]
    fn labels_remap_in_first_appearance_order() {
        let g = load("# header\n10 7\n\n7\t3 0.5\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!((g.label(0), g.label(1), g.label(2)), (10, 7, 3));
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match load("0 1\n1 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match load("0 1\n2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let strict = LoadOptions {
            allow_extra_columns: false,
            ..LoadOptions::default()
        };
        assert!(matches!(
            Graph::load_edge_list("0 1 2\n".as_bytes(), &strict),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(load("# nothing\n"), Err(Error::EmptyGraph)));
        assert!(matches!(load("3 3\n"), Err(Error::EmptyGraph)));
    }

    #[test]
    fn diamond_neighbors() {
        let g = generators::diamond();
        // A=0, B=1, C=2, D=3
        assert_eq!(g.neighbors(1), &[0, 2, 3]);
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.degree(3), 2);
        assert!(g.is_connected());
    }

    #[test]
    fn complete_graph_degrees() {
        let g = generators::complete(4);
        for u in 0..4 {
            assert_eq!(g.neighbors(u).len(), 3);
        }
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn neighbors_out_of_range_panics() {
        generators::path(3).neighbors(3);
    }

    #[test]
    fn connectivity() {
        assert!(!Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap().is_connected());
        // K4 with every edge at vertex 3 removed.
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (1, 2)]).unwrap();
        assert!(!g.is_connected());
        assert_eq!(g.component_count(), 2);
    }

    #[test]
    fn bipartition_detects_odd_cycles() {
        assert!(generators::grid(3, 3).bipartition().is_some());
        assert!(generators::star(5).bipartition().is_some());
        assert!(generators::petersen().bipartition().is_none());
        assert!(generators::diamond().bipartition().is_none());
    }

    #[test]
    fn edge_ids_are_consistent() {
        let g = generators::petersen();
        for (id, &(u, v)) in g.edges().iter().enumerate() {
            assert!(u < v);
            assert_eq!(g.edge_id(u, v), Some(id));
            assert_eq!(g.edge_id(v, u), Some(id));
        }
        assert_eq!(g.edge_id(0, 0), None);
    }

    fn arb_edges() -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
        (2usize..60).prop_flat_map(|n| {
            let e = (0..n as u32, 0..n as u32);
            (Just(n), proptest::collection::vec(e, 1..200))
        })
    }

    proptest! {
        #[test]
        fn csr_invariants_hold((n, edges) in arb_edges()) {
            prop_assume!(edges.iter().any(|&(a, b)| a != b));
            let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
            prop_assert_eq!(g.offsets()[g.n()], 2 * g.m());
            prop_assert!(g.offsets().windows(2).all(|w| w[0] <= w[1]));
            let mut handshake = 0;
            for u in 0..g.n() as u32 {
                let nb = g.neighbors(u);
                handshake += nb.len();
                prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
                for &v in nb {
                    prop_assert!(v != u);
                    prop_assert!(g.neighbors(v).contains(&u));
                }
            }
            prop_assert_eq!(handshake, 2 * g.m());
        }

        #[test]
        fn binary_search_membership_matches_scan((n, edges) in arb_edges()) {
            prop_assume!(edges.iter().any(|&(a, b)| a != b));
            let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
            for u in 0..n as u32 {
                for v in 0..n as u32 {
                    let scan = g.neighbors(u).contains(&v);
                    prop_assert_eq!(g.has_edge(u, v), scan);
                }
            }
        }

        #[test]
        fn edge_list_round_trip(labels in proptest::collection::vec((0u64..500, 0u64..500), 1..150)) {
            let text: String = labels.iter().map(|(a, b)| format!("{a} {b}\n")).collect();
            let Ok(g) = load(&text) else { return Ok(()); };
            let mut buf = Vec::new();
            g.write_edge_list(&mut buf).unwrap();
            let again = Graph::load_edge_list(buf.as_slice(), &LoadOptions::default()).unwrap();
            prop_assert_eq!(again, g);
        }
    }
}
