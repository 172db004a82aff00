//! Energy-aware orchestration of network-modeling applications.
//!
//! The library models a system of applications, model configurations, and
//! heterogeneous compute nodes as a weighted tripartite graph, prunes edges
//! that violate per-application latency/loss targets, recursively bipartitions
//! the complement graph with a simulated QAOA max-cut (falling back to a
//! classical heuristic above the qubit budget), and picks the minimum-energy
//! (configuration, node) pair for every application. Exhaustive-search and
//! fixed-configuration baselines plus scenario fixtures round out the toolkit.
//!
//! All numeric kernels are generic over the scalar type (`f32`/`f64`) through
//! [`Scalar`]; the aliases at the crate root pin the double-precision
//! instantiations used by the CLI and fixtures.

pub mod baselines;
pub mod cost;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod orchestrator;
pub mod qaoa;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision tripartite graph.
pub type Graph64 = graph::TripartiteGraph<f64>;
/// Double-precision scenario.
pub type Scenario64 = scenario::Scenario<f64>;
/// Double-precision statevector.
pub type Statevector64 = qaoa::Statevector<f64>;
/// Double-precision assignment.
pub type Assignment64 = cost::Assignment<f64>;
/// Double-precision orchestration result.
pub type OrchestrationResult64 = orchestrator::OrchestrationResult<f64>;
