//! Spanning edge centrality approximation built on lane-batched random walks.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: immutable CSR graphs, SNAP edge-list loading, small generators.
//! - [`rng`]: stateless hash-based neighbor selection, per-walk seeds, raw stream export.
//! - [`walker`]: scalar walks, lockstep bouquets, walk campaigns and branching statistics.
//! - [`aesc`]: all-edges spanning centrality (truncated traversal + two-way walks) and
//!   the exact Laplacian oracle.
//! - [`bench`]: benchmark harness and the distinct-sample model.
//! - [`cli`]: the `bouquets` command line front end.

pub mod aesc;
pub mod bench;
pub mod cli;
mod error;
pub mod graph;
pub mod rng;
pub mod walker;

pub use error::{Error, Result};
pub use graph::{Graph, VertexId};
