//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use bouquets::graph::generators;
use bouquets::{Graph, VertexId};

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Enumerates every spanning tree by backtracking over edge subsets.
/// Returns the tree count and, per edge id, the number of trees using it.
pub fn enumerate_trees(g: &Graph) -> (u64, Vec<u64>) {
    fn go(
        edges: &[(VertexId, VertexId)],
        next: usize,
        chosen: &mut Vec<usize>,
        need: usize,
        n: usize,
        total: &mut u64,
        per_edge: &mut [u64],
    ) {
        if chosen.len() == need {
            let mut parent: Vec<usize> = (0..n).collect();
            for &id in chosen.iter() {
                let (u, v) = edges[id];
                let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
                if a == b {
                    return;
                }
                parent[a] = b;
            }
            *total += 1;
            for &id in chosen.iter() {
                per_edge[id] += 1;
            }
            return;
        }
        if edges.len() - next < need - chosen.len() {
            return;
        }
        chosen.push(next);
        go(edges, next + 1, chosen, need, n, total, per_edge);
        chosen.pop();
        go(edges, next + 1, chosen, need, n, total, per_edge);
    }
    let mut total = 0;
    let mut per_edge = vec![0; g.m()];
    go(g.edges(), 0, &mut Vec::new(), g.n() - 1, g.n(), &mut total, &mut per_edge);
    (total, per_edge)
}

pub fn named_graphs() -> Vec<(&'static str, Graph)> {
    vec![
        ("triangle", generators::cycle(3)),
        ("path5", generators::path(5)),
        ("star5", generators::star(5)),
        ("k4", generators::complete(4)),
        ("k4_minus_edge", generators::diamond()),
        ("grid3x3", generators::grid(3, 3)),
        ("petersen", generators::petersen()),
    ]
}

