//! Cross-checks against independent oracles: brute-force spanning tree
//! enumeration, exact rational propagation and closed forms.

mod common;

use bouquets::aesc::{
    self, exact_sc, propagate_landing_probabilities, spanning_tree_count, walk_budget, AescConfig,
    LandingWorkspace,
};
use bouquets::graph::generators;
use bouquets::{Graph, VertexId};
use common::{enumerate_trees, named_graphs};
use num_rational::Ratio;

type Q = Ratio<i64>;

#[test]
fn exact_matches_tree_enumeration() {
    for (name, g) in named_graphs() {
        let (total, per_edge) = enumerate_trees(&g);
        assert_eq!(u128::from(total), spanning_tree_count(&g, None).unwrap(), "{name}");
        let sc = exact_sc(&g).unwrap();
        for (id, (&c, &s)) in per_edge.iter().zip(&sc).enumerate() {
            let want = c as f64 / total as f64;
            assert!((s - want).abs() < 1e-9, "{name} edge {id}: {s} vs {want}");
        }
        let sum: f64 = sc.iter().sum();
        assert!((sum - (g.n() - 1) as f64).abs() < 1e-9, "{name}: sum {sum}");
    }
}

#[test]
fn k4_minus_edge_tree_counts() {
    let g = generators::diamond();
    let (total, per_edge) = enumerate_trees(&g);
    assert_eq!(total, 8);
    // AB, AC, BC, BD, CD.
    assert_eq!(per_edge, vec![5, 5, 4, 5, 5]);
}

#[test]
fn petersen_has_2000_trees() {
    assert_eq!(enumerate_trees(&generators::petersen()).0, 2000);
}

fn rational_propagation(g: &Graph, source: VertexId, depth: usize) -> Vec<Vec<Q>> {
    let mut cur = vec![Q::from_integer(0); g.n()];
    cur[source as usize] = Q::from_integer(1);
    let mut all = vec![cur.clone()];
    for _ in 0..depth {
        let mut next = vec![Q::from_integer(0); g.n()];
        for u in 0..g.n() as VertexId {
            let share = cur[u as usize] / Q::from_integer(g.degree(u) as i64);
            for &v in g.neighbors(u) {
                next[v as usize] += share;
            }
        }
        all.push(next.clone());
        cur = next;
    }
    all
}

#[test]
fn propagation_matches_rational_arithmetic() {
    let g = generators::diamond();
    let mut ws = LandingWorkspace::new(g.n());
    let mut seen = Vec::new();
    let depth = propagate_landing_probabilities(&g, 0, |_| u64::MAX, Some(3), &mut ws, |d, q| {
        seen.push((d, (0..4).map(|v| q.get(v)).collect::<Vec<f64>>()));
    });
    assert_eq!(depth, 3);
    let exact = rational_propagation(&g, 0, 3);
    for (d, probs) in &seen {
        for v in 0..4 {
            let q = exact[*d as usize][v];
            let want = *q.numer() as f64 / *q.denom() as f64;
            assert!((probs[v] - want).abs() < 1e-15, "depth {d} vertex {v}");
        }
    }
    let third = Q::new(1, 3);
    let sixth = Q::new(1, 6);
    assert_eq!(exact[1], vec![Q::from_integer(0), Q::new(1, 2), Q::new(1, 2), Q::from_integer(0)]);
    assert_eq!(exact[2], vec![third, sixth, sixth, third]);
    assert_eq!(exact[3], vec![Q::new(1, 9), Q::new(7, 18), Q::new(7, 18), Q::new(1, 9)]);
}

#[test]
fn resistance_series_converges_to_exact() {
    // With every depth summed exactly, the estimate is the truncated series.
    for (name, g) in named_graphs() {
        let exact = exact_sc(&g).unwrap();
        let est = aesc::aesc(
            &g,
            &AescConfig {
                epsilon: 1e-4,
                threads: 1,
                ..AescConfig::default()
            },
        )
        .unwrap();
        assert_eq!(est.walks, 0, "{name}");
        for (a, b) in est.s_hat.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-4, "{name}: {a} vs {b}");
        }
    }
}

#[test]
fn walk_budget_regression() {
    // 2 * 25 / (0.025 * 4)^2 * ln(4 * 100 / 0.05) = 44935.98...
    assert_eq!(walk_budget(5, 0.05, 0.05, 4, 100), 44_936);
}

#[test]
fn triangle_closed_form() {
    for s in exact_sc(&generators::cycle(3)).unwrap() {
        assert!((s - 2.0 / 3.0).abs() < 1e-12);
    }
    // Cycle C_n: every edge has resistance (n-1)/n.
    for n in [5, 8, 13] {
        for s in exact_sc(&generators::cycle(n)).unwrap() {
            assert!((s - (n - 1) as f64 / n as f64).abs() < 1e-9);
        }
    }
}
