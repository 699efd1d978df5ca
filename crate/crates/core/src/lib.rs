//! Planning toolkit for network sovereignty: how much does a network depend
//! on any single equipment manufacturer?
//!
//! The toolkit models a network as an undirected graph whose nodes are each
//! bought from one manufacturer. For every traffic flow it enumerates the
//! k cheapest multi-hop simple paths, collapses paths that rely on the same
//! manufacturer combination, and rewards the rest inversely to how many
//! manufacturers they depend on. The flow-weighted average of those rewards
//! is the path-set diversity (PSD) score.
//!
//! On top of the metric sit:
//! - centrality-based baseline assignments ([`heuristics`]),
//! - an exact branch-and-bound and a seeded local search that maximize the
//!   PSD score, plus an exportable integer-linear model ([`solver`]),
//! - a manufacturer-failure simulator that measures surviving traffic
//!   ([`failsim`]),
//! - a deterministic sweep harness that emits plot-ready CSV ([`experiment`]).

pub mod experiment;
pub mod failsim;
pub mod heuristics;
pub mod metric;
pub mod paths;
pub mod solver;
pub mod topology;

pub use metric::{Assignment, Rational, ScoreReport};
pub use paths::{Combo, Path, PathSet};
pub use topology::{Flow, FlowSet, NodeId, Topology};
