//! Exact branch-and-bound over manufacturer assignments.
//!
//! The linear model's auxiliary variables (path/combo indicators, flow
//! rewards) are all functions of the node-manufacturer choice alone, so
//! the search branches directly on node assignments and evaluates leaves
//! with the scoring routine. Manufacturer labels are interchangeable;
//! node i may only use label m when m <= 1 + max(labels of nodes < i),
//! which visits exactly one representative per label permutation — the
//! lexicographically smallest one.

use std::time::Instant;

use num::Zero;

use crate::metric::{flow_reward_upper_bound, Assignment, Rational};

use super::{Instance, OptimizationResult, SolveBudget, SolveStats, SolverError, SolverKind};

struct ExactSearch<'a> {
    instance: &'a Instance,
    reward_cap: Rational,
    assignment: Vec<usize>,
    best_value: Option<Rational>,
    best_assignment: Vec<usize>,
    nodes_explored: u64,
    max_nodes: u64,
    deadline: Option<Instant>,
    out_of_budget: bool,
}

impl ExactSearch<'_> {
    /// Admissible bound for the partial assignment of nodes `0..depth`.
    ///
    /// Per path: interior nodes below `depth` force a partial combo; the
    /// path cannot reward more than `1/max(|forced|, 1)`. Fully forced
    /// paths repeating an earlier fully forced combo contribute nothing.
    /// Per flow the sum is further capped by the theoretical bound.
    fn upper_bound(&self, depth: usize) -> Rational {
        let mut total = Rational::zero();
        for (flow_index, paths) in self.instance.flow_paths.iter().enumerate() {
            let weight = &self.instance.weights[flow_index];
            if weight.is_zero() {
                continue;
            }
            let mut flow_bound = Rational::zero();
            let mut forced_seen: Vec<u64> = Vec::new();
            for interior in paths {
                let mut forced = 0u64;
                let mut fully_forced = true;
                for &node in interior {
                    if node < depth {
                        forced |= 1 << self.assignment[node];
                    } else {
                        fully_forced = false;
                    }
                }
                if fully_forced {
                    if forced_seen.contains(&forced) {
                        continue;
                    }
                    forced_seen.push(forced);
                }
                let size = forced.count_ones().max(1);
                flow_bound += Rational::new(1, i128::from(size));
            }
            if flow_bound > self.reward_cap {
                flow_bound = self.reward_cap.clone();
            }
            total += weight * flow_bound;
        }
        total
    }

    fn dfs(&mut self, depth: usize, label_cap: usize) {
        if self.out_of_budget {
            return;
        }
        self.nodes_explored += 1;
        if self.nodes_explored > self.max_nodes {
            self.out_of_budget = true;
            return;
        }
        if self.nodes_explored % 1024 == 0 {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.out_of_budget = true;
                    return;
                }
            }
        }
        let node_count = self.instance.node_count();
        if depth == node_count {
            let value = self.instance.objective_raw(&self.assignment);
            let improved = match &self.best_value {
                Some(best) => value > *best,
                None => true,
            };
            if improved {
                self.best_value = Some(value);
                self.best_assignment.copy_from_slice(&self.assignment);
            }
            return;
        }
        if let Some(best) = &self.best_value {
            // DFS runs in ascending assignment order, so an equal-value
            // subtree cannot produce a lexicographically smaller optimum.
            if self.upper_bound(depth) <= *best {
                return;
            }
        }
        let limit = label_cap.min(self.instance.num_manufacturers() - 1);
        for m in 0..=limit {
            self.assignment[depth] = m;
            self.dfs(depth + 1, label_cap.max(m + 1));
            if self.out_of_budget {
                return;
            }
        }
        self.assignment[depth] = 0;
    }
}

/// Maximize the weighted PSD objective exactly.
///
/// Returns the optimal assignment with `proven_optimal = true` when the
/// search ran to exhaustion; on budget exhaustion the best assignment found
/// so far is returned with `proven_optimal = false` and
/// `budget_exhausted = true`. Ties in objective value resolve to the
/// lexicographically smallest assignment vector.
pub fn solve_exact(
    instance: &Instance,
    budget: &SolveBudget,
) -> Result<OptimizationResult, SolverError> {
    if budget.max_nodes == Some(0) {
        return Err(SolverError::InvalidParams(
            "node budget must be positive".into(),
        ));
    }
    if budget.time_limit.map_or(false, |t| t.is_zero()) {
        return Err(SolverError::InvalidParams(
            "time limit must be positive".into(),
        ));
    }
    let start = Instant::now();
    let node_count = instance.node_count();
    let mut search = ExactSearch {
        instance,
        reward_cap: flow_reward_upper_bound(instance.num_manufacturers())?,
        assignment: vec![0; node_count],
        best_value: None,
        best_assignment: vec![0; node_count],
        nodes_explored: 0,
        max_nodes: budget.max_nodes.unwrap_or(u64::MAX),
        deadline: budget.time_limit.map(|limit| start + limit),
        out_of_budget: false,
    };
    search.dfs(0, 0);

    let (objective, manufacturer_of) = match search.best_value {
        Some(value) => (value, search.best_assignment),
        // Budget too small to reach any leaf: fall back to the uniform
        // assignment so callers still get a scored result.
        None => {
            let uniform = vec![0; node_count];
            (instance.objective_raw(&uniform), uniform)
        }
    };
    let assignment = Assignment::new(manufacturer_of, instance.num_manufacturers())?;
    let psd = instance.normalize(&objective);
    Ok(OptimizationResult {
        assignment,
        objective,
        psd,
        solver: SolverKind::Exact,
        proven_optimal: !search.out_of_budget,
        budget_exhausted: search.out_of_budget,
        stats: SolveStats {
            nodes_explored: search.nodes_explored,
            iterations: 0,
            restarts: 0,
            seed: None,
        },
        wall: start.elapsed(),
    })
}
