//! Tools for studying how self-loops change closed-walk statistics and
//! message passing in graph neural networks.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: undirected graphs in compressed adjacency form, self-loop
//!   toggling, isolated-node removal and degree statistics.
//! - [`ensembles`]: seeded random-graph generators (erased configuration
//!   model, stochastic block model) and hypercube node features.
//! - [`walks`]: exact walk counting by repeated sparse application, a
//!   brute-force enumeration oracle, degree-based estimators for the
//!   closed-walk proportion and the self-loop verdict.
//! - [`gnn`]: a small dense GCN/MLP stack with hand-written gradients, Adam,
//!   and the walk-based influence measure of a linear MPNN.
//! - [`experiments`]: plan files, the accuracy grid, walk tables, external
//!   dataset ingestion and report emission.

pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod gnn;
pub mod graph;
pub mod linalg;
pub mod rng;
pub mod walks;

pub use error::{Error, Result};
pub use graph::{DegreeStats, Graph};
pub use rng::RngSeed;
