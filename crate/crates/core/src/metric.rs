//! Path rewards, flow rewards, the PSD score, and the theoretical
//! flow-reward upper bound.
//!
//! All rewards are exact rationals; decimals appear only in reports. A path
//! is rewarded `1/|combo|` where `combo` is the set of manufacturers among
//! its interior nodes, later paths repeating an earlier combination are
//! dropped, and the PSD score is the flow-weight average of the per-flow
//! reward sums.

use num::rational::Ratio;
use num::{integer::binomial, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::paths::{k_shortest_paths, Combo, PathError, PathSet};
use crate::topology::{Flow, FlowSet, NodeId, Topology};

/// Exact rational used for every reward, weight, and objective value.
pub type Rational = Ratio<i128>;

/// `n / d` as a [`Rational`].
pub fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

/// Render a rational as a fixed-point decimal string with `dp` digits.
pub fn decimal_string(value: &Rational, dp: u32) -> String {
    let scale = 10i128.pow(dp);
    let scaled = (value * Rational::from_integer(scale)).round().to_integer();
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.abs();
    format!("{sign}{}.{:0width$}", abs / scale, abs % scale, width = dp as usize)
}

pub const MAX_MANUFACTURERS: usize = 32;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("assignment covers {got} nodes, topology has {expected}")]
    AssignmentSize { expected: usize, got: usize },
    #[error("node {node} assigned manufacturer {got}, but only {limit} manufacturers exist")]
    ManufacturerOutOfRange { node: NodeId, got: usize, limit: usize },
    #[error("number of manufacturers must be in 1..={MAX_MANUFACTURERS}, got {0}")]
    BadManufacturerCount(usize),
    #[error("path interior node {0} is outside the assignment")]
    UnassignedInteriorNode(NodeId),
    #[error("empty manufacturer combination has no reward")]
    EmptyCombo,
    #[error("total flow weight is zero; the PSD score is undefined")]
    ZeroTotalWeight,
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("assignment document is not valid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("assignment entry for node {0} repeated")]
    DuplicateAssignmentNode(usize),
    #[error("assignment is missing node {0}")]
    MissingAssignmentNode(usize),
}

/// Total map node -> manufacturer index in `0..num_manufacturers`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    manufacturer_of: Vec<usize>,
    num_manufacturers: usize,
}

impl Assignment {
    pub fn new(manufacturer_of: Vec<usize>, num_manufacturers: usize) -> Result<Self, MetricError> {
        if num_manufacturers == 0 || num_manufacturers > MAX_MANUFACTURERS {
            return Err(MetricError::BadManufacturerCount(num_manufacturers));
        }
        for (node, &m) in manufacturer_of.iter().enumerate() {
            if m >= num_manufacturers {
                return Err(MetricError::ManufacturerOutOfRange {
                    node: NodeId(node),
                    got: m,
                    limit: num_manufacturers,
                });
            }
        }
        Ok(Assignment {
            manufacturer_of,
            num_manufacturers,
        })
    }

    /// Every node on manufacturer 0.
    pub fn uniform(node_count: usize, num_manufacturers: usize) -> Result<Self, MetricError> {
        Self::new(vec![0; node_count], num_manufacturers)
    }

    pub fn manufacturer(&self, node: NodeId) -> Option<usize> {
        self.manufacturer_of.get(node.index()).copied()
    }

    pub fn num_manufacturers(&self) -> usize {
        self.num_manufacturers
    }

    pub fn node_count(&self) -> usize {
        self.manufacturer_of.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.manufacturer_of
    }

    /// Manufacturer indices actually used by at least one node.
    pub fn used_manufacturers(&self) -> Vec<usize> {
        let mut used = vec![false; self.num_manufacturers];
        for &m in &self.manufacturer_of {
            used[m] = true;
        }
        (0..self.num_manufacturers).filter(|&m| used[m]).collect()
    }

    /// Check the assignment covers exactly this topology's nodes.
    pub fn check_covers(&self, topology: &Topology) -> Result<(), MetricError> {
        if self.node_count() != topology.node_count() {
            return Err(MetricError::AssignmentSize {
                expected: topology.node_count(),
                got: self.node_count(),
            });
        }
        Ok(())
    }

    /// Parse the JSON assignment document.
    pub fn parse(text: &str) -> Result<(Self, Option<String>), MetricError> {
        let doc: AssignmentDoc = serde_json::from_str(text)?;
        let mut manufacturer_of = vec![usize::MAX; doc.assignment.len()];
        for entry in &doc.assignment {
            if entry.node >= manufacturer_of.len() {
                return Err(MetricError::MissingAssignmentNode(entry.node));
            }
            if manufacturer_of[entry.node] != usize::MAX {
                return Err(MetricError::DuplicateAssignmentNode(entry.node));
            }
            manufacturer_of[entry.node] = entry.manufacturer;
        }
        if let Some(missing) = manufacturer_of.iter().position(|&m| m == usize::MAX) {
            return Err(MetricError::MissingAssignmentNode(missing));
        }
        let assignment = Assignment::new(manufacturer_of, doc.num_manufacturers)?;
        Ok((assignment, doc.topology_name))
    }

    /// Render the JSON assignment document.
    pub fn render(&self, topology_name: Option<&str>) -> String {
        let doc = AssignmentDoc {
            topology_name: topology_name.map(str::to_string),
            num_manufacturers: self.num_manufacturers,
            assignment: self
                .manufacturer_of
                .iter()
                .enumerate()
                .map(|(node, &manufacturer)| AssignmentEntryDoc { node, manufacturer })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("assignment serializes");
        out.push('\n');
        out
    }
}

#[derive(Serialize, Deserialize)]
struct AssignmentDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    topology_name: Option<String>,
    num_manufacturers: usize,
    assignment: Vec<AssignmentEntryDoc>,
}

#[derive(Serialize, Deserialize)]
struct AssignmentEntryDoc {
    node: usize,
    manufacturer: usize,
}

/// Path reward `1/|combo|`.
pub fn path_reward(combo: Combo) -> Result<Rational, MetricError> {
    let size = combo.size();
    if size == 0 {
        return Err(MetricError::EmptyCombo);
    }
    Ok(rat(1, size as i128))
}

/// Scoring detail for one path of a flow.
#[derive(Debug, Clone, PartialEq)]
pub struct PathScore {
    pub nodes: Vec<NodeId>,
    pub cost: f64,
    pub combo: Combo,
    /// Index of the earlier path with the identical combo, when removed.
    pub duplicate_of: Option<usize>,
    /// `1/|combo|` for kept paths, absent for removed ones.
    pub reward: Option<Rational>,
}

impl PathScore {
    pub fn kept(&self) -> bool {
        self.duplicate_of.is_none()
    }
}

/// Scoring detail and reward for one flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowScore {
    pub flow: Flow,
    pub paths: Vec<PathScore>,
    /// Sum of kept-path rewards.
    pub reward: Rational,
    /// Set when the flow has no eligible path at all; the reward is 0.
    pub no_eligible_paths: bool,
}

/// Keep the first path per distinct manufacturer combination, discard later
/// duplicates, and sum `1/|combo|` over the kept paths.
pub fn flow_reward(path_set: &PathSet, assignment: &Assignment) -> Result<FlowScore, MetricError> {
    let mut paths: Vec<PathScore> = Vec::with_capacity(path_set.paths().len());
    let mut reward = Rational::zero();
    for path in path_set.paths() {
        let combo = crate::paths::path_combo(path, assignment)?;
        let duplicate_of = paths
            .iter()
            .position(|p| p.kept() && p.combo == combo);
        let path_score = match duplicate_of {
            Some(first) => PathScore {
                nodes: path.nodes().to_vec(),
                cost: path.cost(),
                combo,
                duplicate_of: Some(first),
                reward: None,
            },
            None => {
                let r = path_reward(combo)?;
                reward += &r;
                PathScore {
                    nodes: path.nodes().to_vec(),
                    cost: path.cost(),
                    combo,
                    duplicate_of: None,
                    reward: Some(r),
                }
            }
        };
        paths.push(path_score);
    }
    Ok(FlowScore {
        flow: path_set.flow().clone(),
        paths,
        reward,
        no_eligible_paths: path_set.paths().is_empty(),
    })
}

/// Full scoring report: per-flow detail plus the aggregate PSD score.
#[derive(Debug, Clone)]
pub struct ScoreReport {
    pub topology_name: String,
    pub k: usize,
    pub num_manufacturers: usize,
    pub flows: Vec<FlowScore>,
    /// `sum(w_r * pi_r)` over all flows.
    pub weighted_sum: Rational,
    pub total_weight: Rational,
    /// `weighted_sum / total_weight`.
    pub psd: Rational,
}

impl ScoreReport {
    pub fn psd_f64(&self) -> f64 {
        self.psd.to_f64().unwrap_or(f64::NAN)
    }

    /// Render as a JSON document. Rationals appear both exactly (as
    /// `num/den` strings) and as 6-digit decimals.
    pub fn render(&self, topology: &Topology) -> String {
        let doc = ScoreReportDoc {
            topology_name: self.topology_name.clone(),
            k: self.k,
            num_manufacturers: self.num_manufacturers,
            psd_exact: self.psd.to_string(),
            psd: decimal_string(&self.psd, 6),
            weighted_sum_exact: self.weighted_sum.to_string(),
            total_weight_exact: self.total_weight.to_string(),
            flows: self
                .flows
                .iter()
                .map(|fs| {
                    let (a, b) = fs.flow.endpoints();
                    FlowScoreDoc {
                        src: a.index(),
                        dst: b.index(),
                        src_label: topology.label(a).map(str::to_string),
                        dst_label: topology.label(b).map(str::to_string),
                        weight: fs.flow.weight().to_string(),
                        reward_exact: fs.reward.to_string(),
                        reward: decimal_string(&fs.reward, 6),
                        no_eligible_paths: fs.no_eligible_paths,
                        paths: fs
                            .paths
                            .iter()
                            .map(|ps| PathScoreDoc {
                                nodes: ps.nodes.iter().map(|n| n.index()).collect(),
                                route: ps
                                    .nodes
                                    .iter()
                                    .map(|&n| topology.display_name(n))
                                    .collect::<Vec<_>>()
                                    .join("-"),
                                cost: ps.cost,
                                combo: ps.combo.members(),
                                kept: ps.kept(),
                                duplicate_of: ps.duplicate_of,
                                reward: ps.reward.as_ref().map(|r| r.to_string()),
                            })
                            .collect(),
                    }
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
        out.push('\n');
        out
    }
}

#[derive(Serialize, Deserialize)]
struct ScoreReportDoc {
    topology_name: String,
    k: usize,
    num_manufacturers: usize,
    psd_exact: String,
    psd: String,
    weighted_sum_exact: String,
    total_weight_exact: String,
    flows: Vec<FlowScoreDoc>,
}

#[derive(Serialize, Deserialize)]
struct FlowScoreDoc {
    src: usize,
    dst: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    src_label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dst_label: Option<String>,
    weight: String,
    reward_exact: String,
    reward: String,
    no_eligible_paths: bool,
    paths: Vec<PathScoreDoc>,
}

#[derive(Serialize, Deserialize)]
struct PathScoreDoc {
    nodes: Vec<usize>,
    route: String,
    cost: f64,
    combo: Vec<usize>,
    kept: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    duplicate_of: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reward: Option<String>,
}

/// Score a whole network: compute every flow's reward over its k shortest
/// eligible paths and average, weighted by the flow weights.
pub fn psd_score(
    topology: &Topology,
    flows: &FlowSet,
    assignment: &Assignment,
    k: usize,
) -> Result<ScoreReport, MetricError> {
    assignment.check_covers(topology)?;
    let total_weight = flows.total_weight();
    if total_weight.is_zero() {
        return Err(MetricError::ZeroTotalWeight);
    }
    let mut flow_scores = Vec::with_capacity(flows.len());
    let mut weighted_sum = Rational::zero();
    for flow in flows.iter() {
        let path_set = k_shortest_paths(topology, flow, k)?;
        let score = flow_reward(&path_set, assignment)?;
        weighted_sum += flow.weight() * &score.reward;
        flow_scores.push(score);
    }
    let psd = &weighted_sum / &total_weight;
    Ok(ScoreReport {
        topology_name: topology.name().to_string(),
        k,
        num_manufacturers: assignment.num_manufacturers(),
        flows: flow_scores,
        weighted_sum,
        total_weight,
        psd,
    })
}

/// Theoretical flow-reward bound: every non-empty manufacturer combination
/// present once, i.e. `sum_{i=1..=M} C(M, i) / i`.
pub fn flow_reward_upper_bound(num_manufacturers: usize) -> Result<Rational, MetricError> {
    if num_manufacturers == 0 || num_manufacturers > MAX_MANUFACTURERS {
        return Err(MetricError::BadManufacturerCount(num_manufacturers));
    }
    let m = num_manufacturers as i128;
    let mut bound = Rational::zero();
    for i in 1..=m {
        bound += rat(binomial(m, i), i);
    }
    Ok(bound)
}
