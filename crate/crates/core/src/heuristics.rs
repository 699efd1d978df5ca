//! Centrality-based baseline manufacturer assignments: compute node
//! importance, sort descending, assign round-robin so nodes of similar
//! importance land on different manufacturers.

use std::collections::BinaryHeap;

use thiserror::Error;

use crate::metric::{Assignment, MetricError};
use crate::topology::{FlowSet, NodeId, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CentralityKind {
    NodalDegree,
    Betweenness,
    Closeness,
}

impl CentralityKind {
    pub const ALL: [CentralityKind; 3] = [
        CentralityKind::NodalDegree,
        CentralityKind::Betweenness,
        CentralityKind::Closeness,
    ];

    /// Short code used in CLI flags and file names.
    pub fn code(self) -> &'static str {
        match self {
            CentralityKind::NodalDegree => "nd",
            CentralityKind::Betweenness => "bwc",
            CentralityKind::Closeness => "cc",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "nd" => Some(CentralityKind::NodalDegree),
            "bwc" => Some(CentralityKind::Betweenness),
            "cc" => Some(CentralityKind::Closeness),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error("closeness centrality needs a connected topology")]
    Disconnected,
    #[error("betweenness centrality needs a non-empty flow set")]
    NoFlows,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Per-node centrality values with the descending order used for
/// assignment. Equal values keep ascending node-id order.
#[derive(Debug, Clone)]
pub struct CentralityRanking {
    pub kind: CentralityKind,
    pub values: Vec<f64>,
    pub order: Vec<NodeId>,
}

/// Compute one centrality metric and the induced node order.
///
/// Betweenness counts each unordered flow pair once and splits credit
/// equally among equal-cost shortest paths; closeness is the inverse mean
/// shortest-path distance.
pub fn centrality_ranking(
    topology: &Topology,
    kind: CentralityKind,
    flows: &FlowSet,
) -> Result<CentralityRanking, HeuristicError> {
    let values = match kind {
        CentralityKind::NodalDegree => topology.nodes().map(|n| topology.degree(n) as f64).collect(),
        CentralityKind::Betweenness => betweenness(topology, flows)?,
        CentralityKind::Closeness => closeness(topology)?,
    };
    let mut order: Vec<NodeId> = topology.nodes().collect();
    order.sort_by(|&a, &b| {
        values[b.index()]
            .total_cmp(&values[a.index()])
            .then(a.cmp(&b))
    });
    Ok(CentralityRanking { kind, values, order })
}

/// Dijkstra distances and shortest-path counts from one source.
fn sssp_counts(topology: &Topology, source: NodeId) -> (Vec<f64>, Vec<f64>) {
    use std::cmp::Reverse;
    let n = topology.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut sigma = vec![0.0_f64; n];
    let mut settled = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(u64, NodeId)>> = BinaryHeap::new();
    dist[source.index()] = 0.0;
    sigma[source.index()] = 1.0;
    heap.push(Reverse((0, source)));
    while let Some(Reverse((_, node))) = heap.pop() {
        if settled[node.index()] {
            continue;
        }
        settled[node.index()] = true;
        for &(next, weight) in topology.neighbors(node) {
            let candidate = dist[node.index()] + weight;
            let current = dist[next.index()];
            if candidate < current {
                dist[next.index()] = candidate;
                sigma[next.index()] = sigma[node.index()];
                heap.push(Reverse((candidate.to_bits(), next)));
            } else if candidate == current && !settled[next.index()] {
                sigma[next.index()] += sigma[node.index()];
            }
        }
    }
    (dist, sigma)
}

/// Shortest-path betweenness restricted to the pairs that carry traffic.
fn betweenness(topology: &Topology, flows: &FlowSet) -> Result<Vec<f64>, HeuristicError> {
    if flows.is_empty() {
        return Err(HeuristicError::NoFlows);
    }
    let n = topology.node_count();
    let mut values = vec![0.0_f64; n];
    for flow in flows.iter() {
        let (s, t) = flow.endpoints();
        let (dist_s, sigma_s) = sssp_counts(topology, s);
        let (dist_t, sigma_t) = sssp_counts(topology, t);
        let total = dist_s[t.index()];
        if !total.is_finite() || sigma_s[t.index()] == 0.0 {
            continue;
        }
        for v in topology.nodes() {
            if v == s || v == t {
                continue;
            }
            if dist_s[v.index()] + dist_t[v.index()] == total {
                values[v.index()] +=
                    sigma_s[v.index()] * sigma_t[v.index()] / sigma_s[t.index()];
            }
        }
    }
    Ok(values)
}

/// `(n - 1) / sum of distances`; infinite distances are an error.
fn closeness(topology: &Topology) -> Result<Vec<f64>, HeuristicError> {
    let n = topology.node_count();
    let mut values = vec![0.0_f64; n];
    for v in topology.nodes() {
        let (dist, _) = sssp_counts(topology, v);
        let mut sum = 0.0;
        for u in topology.nodes() {
            if u == v {
                continue;
            }
            let d = dist[u.index()];
            if !d.is_finite() {
                return Err(HeuristicError::Disconnected);
            }
            sum += d;
        }
        values[v.index()] = (n as f64 - 1.0) / sum;
    }
    Ok(values)
}

/// The i-th node in ranking order gets manufacturer `i mod |M|`.
pub fn round_robin_assign(
    ranking: &CentralityRanking,
    num_manufacturers: usize,
) -> Result<Assignment, HeuristicError> {
    if num_manufacturers == 0 {
        return Err(HeuristicError::Metric(MetricError::BadManufacturerCount(0)));
    }
    let mut manufacturer_of = vec![0usize; ranking.order.len()];
    for (i, node) in ranking.order.iter().enumerate() {
        manufacturer_of[node.index()] = i % num_manufacturers;
    }
    Ok(Assignment::new(manufacturer_of, num_manufacturers)?)
}

/// Convenience: ranking plus round-robin in one step.
pub fn centrality_assignment(
    topology: &Topology,
    kind: CentralityKind,
    flows: &FlowSet,
    num_manufacturers: usize,
) -> Result<Assignment, HeuristicError> {
    let ranking = centrality_ranking(topology, kind, flows)?;
    round_robin_assign(&ranking, num_manufacturers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::enumerate_flows;

    #[test]
    fn ring_all_metrics_tie_to_id_order() {
        let topology = Topology::ring(6).unwrap();
        let flows = enumerate_flows(&topology, None).unwrap();
        for kind in CentralityKind::ALL {
            let ranking = centrality_ranking(&topology, kind, &flows).unwrap();
            assert!(
                ranking.values.windows(2).all(|w| w[0] == w[1]),
                "{kind:?} values differ on a ring"
            );
            let ids: Vec<usize> = ranking.order.iter().map(|n| n.index()).collect();
            assert_eq!(ids, (0..6).collect::<Vec<_>>(), "{kind:?}");
        }
    }

    #[test]
    fn complete_graph_metrics_all_equal() {
        let topology = Topology::complete(5).unwrap();
        let flows = enumerate_flows(&topology, None).unwrap();
        for kind in CentralityKind::ALL {
            let ranking = centrality_ranking(&topology, kind, &flows).unwrap();
            assert!(ranking.values.windows(2).all(|w| w[0] == w[1]), "{kind:?}");
        }
    }

    #[test]
    fn round_robin_class_sizes_differ_by_at_most_one() {
        let topology = Topology::ring(7).unwrap();
        let flows = enumerate_flows(&topology, None).unwrap();
        let ranking =
            centrality_ranking(&topology, CentralityKind::NodalDegree, &flows).unwrap();
        for m in 1..=4 {
            let assignment = round_robin_assign(&ranking, m).unwrap();
            let mut sizes = vec![0usize; m];
            for &v in assignment.as_slice() {
                sizes[v] += 1;
            }
            let (min, max) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            assert!(max - min <= 1);
        }
    }

    #[test]
    fn single_manufacturer_collapses_to_uniform() {
        let topology = Topology::ring(5).unwrap();
        let flows = enumerate_flows(&topology, None).unwrap();
        let assignment =
            centrality_assignment(&topology, CentralityKind::Closeness, &flows, 1).unwrap();
        assert!(assignment.as_slice().iter().all(|&m| m == 0));
    }

    #[test]
    fn disconnected_closeness_rejected() {
        let topology =
            Topology::new("split", vec![None; 4], &[(0, 1, None), (2, 3, None)]).unwrap();
        let flows = enumerate_flows(&topology, None).unwrap();
        assert!(matches!(
            centrality_ranking(&topology, CentralityKind::Closeness, &flows),
            Err(HeuristicError::Disconnected)
        ));
    }

    #[test]
    fn betweenness_needs_flows() {
        let topology = Topology::ring(4).unwrap();
        let flows = FlowSet::new(Vec::new()).unwrap();
        assert!(matches!(
            centrality_ranking(&topology, CentralityKind::Betweenness, &flows),
            Err(HeuristicError::NoFlows)
        ));
    }
}
