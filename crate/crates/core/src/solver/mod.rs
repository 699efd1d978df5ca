//! Manufacturer-assignment optimization: maximize the weighted PSD
//! objective over assignments via exact branch-and-bound or seeded local
//! search, with an exportable linear model for third-party verification.

mod exact;
mod linear;
mod local;

pub use exact::solve_exact;
pub use linear::{export_linear_model, Constraint, ConstraintOp, LinearModel, VarKind, VarRole, Variable};
pub use local::{solve_local, LocalSearchParams};

use std::time::Duration;

use num::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::metric::{self, Assignment, MetricError, Rational};
use crate::paths::{k_shortest_paths, PathError, PathSet};
use crate::topology::{FlowSet, Topology};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("invalid solver parameter: {0}")]
    InvalidParams(String),
}

/// A MAS problem instance: topology, weighted flows, manufacturer count,
/// and the per-flow path sets precomputed once for the chosen k.
#[derive(Debug, Clone)]
pub struct Instance {
    topology: Topology,
    flows: FlowSet,
    num_manufacturers: usize,
    k: usize,
    path_sets: Vec<PathSet>,
    /// Per flow, per path: interior node indices (flattened for scoring).
    flow_paths: Vec<Vec<Vec<usize>>>,
    /// Node index -> flows with that node in some path interior.
    node_flows: Vec<Vec<usize>>,
    weights: Vec<Rational>,
    total_weight: Rational,
}

impl Instance {
    pub fn build(
        topology: Topology,
        flows: FlowSet,
        num_manufacturers: usize,
        k: usize,
    ) -> Result<Self, SolverError> {
        if num_manufacturers == 0 || num_manufacturers > metric::MAX_MANUFACTURERS {
            return Err(MetricError::BadManufacturerCount(num_manufacturers).into());
        }
        if k == 0 {
            return Err(PathError::ZeroK.into());
        }
        let path_sets: Vec<PathSet> = flows
            .flows()
            .par_iter()
            .map(|flow| k_shortest_paths(&topology, flow, k))
            .collect::<Result<_, _>>()?;
        let flow_paths: Vec<Vec<Vec<usize>>> = path_sets
            .iter()
            .map(|set| {
                set.paths()
                    .iter()
                    .map(|p| p.interior().iter().map(|n| n.index()).collect())
                    .collect()
            })
            .collect();
        let mut node_flows = vec![Vec::new(); topology.node_count()];
        for (flow_index, paths) in flow_paths.iter().enumerate() {
            let mut touched: Vec<usize> = paths.iter().flatten().copied().collect();
            touched.sort_unstable();
            touched.dedup();
            for node in touched {
                node_flows[node].push(flow_index);
            }
        }
        let weights: Vec<Rational> = flows.iter().map(|f| f.weight().clone()).collect();
        let total_weight = flows.total_weight();
        Ok(Instance {
            topology,
            flows,
            num_manufacturers,
            k,
            path_sets,
            flow_paths,
            node_flows,
            weights,
            total_weight,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn flows(&self) -> &FlowSet {
        &self.flows
    }

    pub fn num_manufacturers(&self) -> usize {
        self.num_manufacturers
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn path_sets(&self) -> &[PathSet] {
        &self.path_sets
    }

    pub fn node_count(&self) -> usize {
        self.topology.node_count()
    }

    pub fn total_weight(&self) -> &Rational {
        &self.total_weight
    }

    /// All non-empty manufacturer combinations with their rewards
    /// `q = 1/|combo|`, ordered by combo bits.
    pub fn combo_universe(&self) -> Vec<(u64, Rational)> {
        let m = self.num_manufacturers as u32;
        (1..(1u64 << m))
            .map(|bits| (bits, Rational::new(1, i128::from(bits.count_ones()))))
            .collect()
    }

    fn check_assignment(&self, assignment: &Assignment) -> Result<(), SolverError> {
        assignment.check_covers(&self.topology)?;
        if assignment.num_manufacturers() != self.num_manufacturers {
            return Err(SolverError::InvalidParams(format!(
                "assignment has {} manufacturers, instance expects {}",
                assignment.num_manufacturers(),
                self.num_manufacturers
            )));
        }
        Ok(())
    }

    /// Reward of one flow under a raw assignment vector: combo per path,
    /// keep-first per distinct combo, sum of inverse combo sizes.
    fn flow_reward_raw(&self, flow_index: usize, manufacturer_of: &[usize]) -> Rational {
        let mut seen: Vec<u64> = Vec::new();
        let mut reward = Rational::zero();
        for interior in &self.flow_paths[flow_index] {
            let mut combo = 0u64;
            for &node in interior {
                combo |= 1 << manufacturer_of[node];
            }
            if !seen.contains(&combo) {
                seen.push(combo);
                reward += Rational::new(1, i128::from(combo.count_ones()));
            }
        }
        reward
    }

    fn objective_raw(&self, manufacturer_of: &[usize]) -> Rational {
        let mut total = Rational::zero();
        for flow_index in 0..self.flow_paths.len() {
            total += &self.weights[flow_index] * self.flow_reward_raw(flow_index, manufacturer_of);
        }
        total
    }

    /// `sum(w_r * pi_r)` for the assignment. Identical to scoring through
    /// the metric module; the fast path here avoids rebuilding path sets.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<Rational, SolverError> {
        self.check_assignment(assignment)?;
        Ok(self.objective_raw(assignment.as_slice()))
    }

    /// Normalized PSD score for a raw objective value.
    pub fn normalize(&self, objective: &Rational) -> Rational {
        objective / &self.total_weight
    }
}

/// Build a MAS instance, computing each flow's path set once.
pub fn build_instance(
    topology: Topology,
    flows: FlowSet,
    num_manufacturers: usize,
    k: usize,
) -> Result<Instance, SolverError> {
    Instance::build(topology, flows, num_manufacturers, k)
}

/// `sum(w_r * pi_r)` of the assignment on the instance.
pub fn evaluate_objective(
    instance: &Instance,
    assignment: &Assignment,
) -> Result<Rational, SolverError> {
    instance.evaluate(assignment)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Exact,
    Local,
}

impl SolverKind {
    pub fn code(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Local => "local",
        }
    }
}

/// Node-exploration and wall-clock limits for the exact search. Defaults to
/// unlimited. Only the node budget keeps truncated runs deterministic.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveBudget {
    pub max_nodes: Option<u64>,
    pub time_limit: Option<Duration>,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub nodes_explored: u64,
    pub iterations: u64,
    pub restarts: u32,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub assignment: Assignment,
    /// Raw objective `sum(w_r * pi_r)`.
    pub objective: Rational,
    /// Normalized PSD score (objective over total weight).
    pub psd: Rational,
    pub solver: SolverKind,
    /// True only when an exact search ran to exhaustion.
    pub proven_optimal: bool,
    /// True when the search stopped on a budget limit.
    pub budget_exhausted: bool,
    pub stats: SolveStats,
    /// Wall time, reported on the terminal but kept out of result files so
    /// identical runs produce identical bytes.
    pub wall: Duration,
}

impl OptimizationResult {
    /// Render the JSON result document (deterministic; no timing fields).
    pub fn render(&self, topology_name: &str, k: usize) -> String {
        let doc = serde_json::json!({
            "topology_name": topology_name,
            "num_manufacturers": self.assignment.num_manufacturers(),
            "k": k,
            "solver": self.solver.code(),
            "objective_exact": self.objective.to_string(),
            "objective": metric::decimal_string(&self.objective, 6),
            "psd_exact": self.psd.to_string(),
            "psd": metric::decimal_string(&self.psd, 6),
            "proven_optimal": self.proven_optimal,
            "budget_exhausted": self.budget_exhausted,
            "stats": {
                "nodes_explored": self.stats.nodes_explored,
                "iterations": self.stats.iterations,
                "restarts": self.stats.restarts,
                "seed": self.stats.seed,
            },
            "assignment": self.assignment.as_slice(),
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("result serializes");
        out.push('\n');
        out
    }
}
