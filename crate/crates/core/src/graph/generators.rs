//! Small named graphs and seeded random graph models.

use super::{Graph, VertexId};
use crate::rng::SplitMix64;

fn build(n: usize, edges: Vec<(VertexId, VertexId)>) -> Graph {
    Graph::from_edges(n, edges).expect("generator produced a valid edge set")
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> Graph {
    assert!(n >= 2);
    build(n, (1..n as VertexId).map(|v| (v - 1, v)).collect())
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3);
    let n32 = n as VertexId;
    build(n, (0..n32).map(|v| (v, (v + 1) % n32)).collect())
}

/// Star with center 0 and `leaves` leaves.
pub fn star(leaves: usize) -> Graph {
    assert!(leaves >= 1);
    build(leaves + 1, (1..=leaves as VertexId).map(|v| (0, v)).collect())
}

pub fn complete(n: usize) -> Graph {
    assert!(n >= 2);
    let mut edges = Vec::new();
    for u in 0..n as VertexId {
        for v in u + 1..n as VertexId {
            edges.push((u, v));
        }
    }
    build(n, edges)
}

/// `rows x cols` grid, vertex `r * cols + c`.
pub fn grid(rows: usize, cols: usize) -> Graph {
    assert!(rows * cols >= 2);
    let id = |r: usize, c: usize| (r * cols + c) as VertexId;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    build(rows * cols, edges)
}

pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((i + 5, (i + 2) % 5 + 5));
    }
    build(10, edges)
}

/// Four vertices A=0, B=1, C=2, D=3 with every edge except A-D.
pub fn diamond() -> Graph {
    build(4, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)])
}

/// Preferential attachment: each new vertex links to `attach` distinct
/// earlier vertices chosen proportionally to degree. Starts from a clique on
/// `attach + 1` vertices, so the result is connected with min degree `attach`.
pub fn barabasi_albert(n: usize, attach: usize, seed: u64) -> Graph {
    assert!(attach >= 1 && n > attach);
    let mut rng = SplitMix64::new(seed);
    let mut edges = Vec::with_capacity(n * attach);
    // Every edge endpoint, so a uniform pick is a degree-proportional pick.
    let mut endpoints: Vec<VertexId> = Vec::with_capacity(2 * n * attach);
    for u in 0..=attach as VertexId {
        for v in u + 1..=attach as VertexId {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    let mut chosen = Vec::with_capacity(attach);
    for v in attach as VertexId + 1..n as VertexId {
        chosen.clear();
        while chosen.len() < attach {
            let t = endpoints[rng.below(endpoints.len() as u64) as usize];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            edges.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    build(n, edges)
}

/// Random connected graph: a random recursive tree plus `extra` random edges.
pub fn random_connected(n: usize, extra: usize, seed: u64) -> Graph {
    assert!(n >= 2);
    let mut rng = SplitMix64::new(seed);
    let mut edges = Vec::with_capacity(n - 1 + extra);
    for v in 1..n as u64 {
        edges.push((rng.below(v) as VertexId, v as VertexId));
    }
    for _ in 0..extra {
        let a = rng.below(n as u64) as VertexId;
        let b = rng.below(n as u64) as VertexId;
        edges.push((a, b));
    }
    build(n, edges)
}
