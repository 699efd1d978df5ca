//! Manufacturer-failure scenarios and the percentage of flows that remain
//! routable under each one.
//!
//! A scenario fails a non-empty strict subset of manufacturers; every
//! non-endpoint node bought from a failed manufacturer disappears. A flow
//! survives when its endpoints stay connected (residual mode) or when one
//! of its k scored paths avoids the failure (k-path mode). Endpoints are
//! never deleted.

use num::{ToPrimitive, Zero};
use thiserror::Error;

use crate::metric::{Assignment, MetricError, Rational};
use crate::paths::{k_shortest_paths, PathError, PathSet};
use crate::topology::{FlowSet, NodeId, Topology};

#[derive(Debug, Error)]
pub enum FailsimError {
    #[error("failure scenarios need at least 2 manufacturers, got {0}")]
    TooFewManufacturers(usize),
    #[error("scenario enumeration with {0} manufacturers is too large (max 16)")]
    TooManyManufacturers(usize),
    #[error("scenario fails manufacturer {got}, but only {limit} manufacturers exist")]
    UnknownManufacturer { got: usize, limit: usize },
    #[error("scenario must fail a non-empty strict subset of manufacturers")]
    NotStrictSubset,
    #[error("k-path mode needs k")]
    MissingK,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Non-empty strict subset of manufacturer indices, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureScenario {
    failed: Vec<usize>,
}

impl FailureScenario {
    pub fn new(mut failed: Vec<usize>, num_manufacturers: usize) -> Result<Self, FailsimError> {
        failed.sort_unstable();
        failed.dedup();
        if failed.is_empty() || failed.len() >= num_manufacturers {
            return Err(FailsimError::NotStrictSubset);
        }
        if let Some(&bad) = failed.iter().find(|&&m| m >= num_manufacturers) {
            return Err(FailsimError::UnknownManufacturer {
                got: bad,
                limit: num_manufacturers,
            });
        }
        Ok(FailureScenario { failed })
    }

    pub fn members(&self) -> &[usize] {
        &self.failed
    }

    pub fn contains(&self, manufacturer: usize) -> bool {
        self.failed.binary_search(&manufacturer).is_ok()
    }

    /// Label used in CSV output, e.g. `0+2`.
    pub fn label(&self) -> String {
        self.failed
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// All non-empty strict subsets of `0..|M|`, ordered by cardinality then
/// lexicographic member order: `2^|M| - 2` scenarios.
pub fn failure_scenarios(num_manufacturers: usize) -> Result<Vec<FailureScenario>, FailsimError> {
    if num_manufacturers < 2 {
        return Err(FailsimError::TooFewManufacturers(num_manufacturers));
    }
    if num_manufacturers > 16 {
        return Err(FailsimError::TooManyManufacturers(num_manufacturers));
    }
    let mut subsets: Vec<Vec<usize>> = (1..(1u32 << num_manufacturers) - 1)
        .map(|bits| {
            (0..num_manufacturers)
                .filter(|&m| bits & (1 << m) != 0)
                .collect()
        })
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(subsets
        .into_iter()
        .map(|failed| FailureScenario { failed })
        .collect())
}

/// How a flow's survival is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Endpoints still connected in the residual graph (any surviving
    /// path). The default.
    Residual,
    /// Some path of the flow's k-shortest path set (or the direct edge)
    /// has no failed interior node.
    KPaths,
}

impl EvalMode {
    pub fn code(self) -> &'static str {
        match self {
            EvalMode::Residual => "residual",
            EvalMode::KPaths => "kpaths",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "residual" => Some(EvalMode::Residual),
            "kpaths" => Some(EvalMode::KPaths),
            _ => None,
        }
    }
}

/// Outcome of one scenario over a flow set.
#[derive(Debug, Clone)]
pub struct SuccessReport {
    pub scenario: FailureScenario,
    pub mode: EvalMode,
    /// Parallel to the flow set.
    pub flow_success: Vec<bool>,
    pub flows_total: usize,
    pub flows_success: usize,
    /// Percent of flows that survive, 0..=100.
    pub pct_success: f64,
    /// Flow-weighted percent (0 when the total weight is zero).
    pub pct_success_weighted: f64,
}

fn endpoints_connected(
    topology: &Topology,
    s: NodeId,
    t: NodeId,
    removed: &[bool],
) -> bool {
    let mut seen = vec![false; topology.node_count()];
    let mut stack = vec![s];
    seen[s.index()] = true;
    while let Some(node) = stack.pop() {
        if node == t {
            return true;
        }
        for &(next, _) in topology.neighbors(node) {
            let idx = next.index();
            if seen[idx] || (removed[idx] && next != s && next != t) {
                continue;
            }
            seen[idx] = true;
            stack.push(next);
        }
    }
    false
}

fn path_survives(path_set: &PathSet, topology: &Topology, removed: &[bool]) -> bool {
    let (s, t) = path_set.flow().endpoints();
    if topology.has_edge(s, t) {
        return true;
    }
    path_set
        .paths()
        .iter()
        .any(|path| path.interior().iter().all(|n| !removed[n.index()]))
}

fn evaluate_scenario(
    topology: &Topology,
    assignment: &Assignment,
    flows: &FlowSet,
    scenario: &FailureScenario,
    mode: EvalMode,
    path_sets: Option<&[PathSet]>,
) -> Result<SuccessReport, FailsimError> {
    assignment.check_covers(topology)?;
    if let Some(&bad) = scenario
        .members()
        .iter()
        .find(|&&m| m >= assignment.num_manufacturers())
    {
        return Err(FailsimError::UnknownManufacturer {
            got: bad,
            limit: assignment.num_manufacturers(),
        });
    }
    let removed: Vec<bool> = (0..topology.node_count())
        .map(|n| scenario.contains(assignment.as_slice()[n]))
        .collect();
    let mut flow_success = Vec::with_capacity(flows.len());
    let mut successes = 0usize;
    let mut weight_total = Rational::zero();
    let mut weight_success = Rational::zero();
    for (index, flow) in flows.iter().enumerate() {
        let (s, t) = flow.endpoints();
        let success = match mode {
            EvalMode::Residual => endpoints_connected(topology, s, t, &removed),
            EvalMode::KPaths => {
                let sets = path_sets.expect("k-path mode precomputes path sets");
                path_survives(&sets[index], topology, &removed)
            }
        };
        flow_success.push(success);
        if success {
            successes += 1;
            weight_success += flow.weight();
        }
        weight_total += flow.weight();
    }
    let pct_success = if flows.is_empty() {
        0.0
    } else {
        100.0 * successes as f64 / flows.len() as f64
    };
    let pct_success_weighted = if weight_total.is_zero() {
        0.0
    } else {
        100.0 * (weight_success / weight_total).to_f64().unwrap_or(f64::NAN)
    };
    Ok(SuccessReport {
        scenario: scenario.clone(),
        mode,
        flow_success,
        flows_total: flows.len(),
        flows_success: successes,
        pct_success,
        pct_success_weighted,
    })
}

/// Simulate one failure scenario.
pub fn simulate(
    topology: &Topology,
    assignment: &Assignment,
    flows: &FlowSet,
    scenario: &FailureScenario,
    mode: EvalMode,
    k: Option<usize>,
) -> Result<SuccessReport, FailsimError> {
    let path_sets = match mode {
        EvalMode::Residual => None,
        EvalMode::KPaths => {
            let k = k.ok_or(FailsimError::MissingK)?;
            Some(
                flows
                    .iter()
                    .map(|flow| k_shortest_paths(topology, flow, k))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        }
    };
    evaluate_scenario(topology, assignment, flows, scenario, mode, path_sets.as_deref())
}

/// Simulate every failure scenario, in `failure_scenarios` order.
pub fn simulate_all(
    topology: &Topology,
    assignment: &Assignment,
    flows: &FlowSet,
    mode: EvalMode,
    k: Option<usize>,
) -> Result<Vec<SuccessReport>, FailsimError> {
    let scenarios = failure_scenarios(assignment.num_manufacturers())?;
    let path_sets = match mode {
        EvalMode::Residual => None,
        EvalMode::KPaths => {
            let k = k.ok_or(FailsimError::MissingK)?;
            Some(
                flows
                    .iter()
                    .map(|flow| k_shortest_paths(topology, flow, k))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        }
    };
    scenarios
        .iter()
        .map(|scenario| {
            evaluate_scenario(topology, assignment, flows, scenario, mode, path_sets.as_deref())
        })
        .collect()
}

/// CSV rows for a batch of reports:
/// `scenario,mode,flows_total,flows_success,pct_success,pct_success_weighted`.
pub fn reports_to_csv(reports: &[SuccessReport]) -> String {
    let mut out = String::from("scenario,mode,flows_total,flows_success,pct_success,pct_success_weighted\n");
    for report in reports {
        out.push_str(&format!(
            "{},{},{},{},{:.4},{:.4}\n",
            report.scenario.label(),
            report.mode.code(),
            report.flows_total,
            report.flows_success,
            report.pct_success,
            report.pct_success_weighted,
        ));
    }
    out
}
