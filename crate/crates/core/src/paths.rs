//! Enumeration of the k shortest eligible simple paths per flow and
//! extraction of per-path manufacturer combinations.
//!
//! "Eligible" excludes one-hop paths: endpoints never count toward a path's
//! manufacturer combination, so the direct edge between a flow's endpoints
//! carries no information and is dropped at enumeration time. Paths are
//! ordered by total cost with lexicographic node-sequence tie-breaking,
//! which makes the k-path set a prefix of the (k+1)-path set.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::metric::{Assignment, MetricError};
use crate::topology::{Flow, NodeId, Topology};

#[derive(Debug, Error)]
pub enum PathError {
    #[error("flow endpoint {0} is not in the topology (|V| = {1})")]
    UnknownEndpoint(NodeId, usize),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("path node {0} is not in the topology (|V| = {1})")]
    UnknownNode(NodeId, usize),
    #[error("path visits node {0} twice")]
    RepeatedNode(NodeId),
    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(NodeId, NodeId),
    #[error("a path needs at least 2 nodes")]
    TooShort,
    #[error("path set for flow ({0}, {1}) violates its ordering invariant")]
    UnorderedPathSet(NodeId, NodeId),
    #[error("path set must not contain one-hop paths")]
    OneHopPath,
    #[error("path set contains a duplicate path")]
    DuplicatePath,
    #[error("path does not connect the flow endpoints ({0}, {1})")]
    WrongEndpoints(NodeId, NodeId),
}

/// Simple path through the topology; cost is the sum of edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    nodes: Vec<NodeId>,
    cost: f64,
}

impl Path {
    /// Validate adjacency and simplicity against the topology and compute
    /// the cost canonically (edge weights summed in path order).
    pub fn from_nodes(topology: &Topology, nodes: Vec<NodeId>) -> Result<Self, PathError> {
        if nodes.len() < 2 {
            return Err(PathError::TooShort);
        }
        let mut seen = vec![false; topology.node_count()];
        for &node in &nodes {
            if !topology.contains(node) {
                return Err(PathError::UnknownNode(node, topology.node_count()));
            }
            if seen[node.index()] {
                return Err(PathError::RepeatedNode(node));
            }
            seen[node.index()] = true;
        }
        let mut cost = 0.0;
        for hop in nodes.windows(2) {
            match topology.edge_weight(hop[0], hop[1]) {
                Some(w) => cost += w,
                None => return Err(PathError::NotAdjacent(hop[0], hop[1])),
            }
        }
        Ok(Path { nodes, cost })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Intermediate nodes only: the sequence minus its first and last
    /// elements.
    pub fn interior(&self) -> &[NodeId] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn hop_count(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Total order on (cost, node sequence); the tie-break that makes every
/// enumeration deterministic.
fn compare_paths(a_cost: f64, a_nodes: &[NodeId], b_cost: f64, b_nodes: &[NodeId]) -> Ordering {
    a_cost
        .total_cmp(&b_cost)
        .then_with(|| a_nodes.cmp(b_nodes))
}

/// The ordered list of up-to-k eligible shortest simple paths for one flow.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    flow: Flow,
    k: usize,
    paths: Vec<Path>,
}

impl PathSet {
    pub fn new(flow: Flow, k: usize, paths: Vec<Path>) -> Result<Self, PathError> {
        let (s, t) = flow.endpoints();
        for path in &paths {
            if path.hop_count() < 2 {
                return Err(PathError::OneHopPath);
            }
            let first = *path.nodes().first().unwrap();
            let last = *path.nodes().last().unwrap();
            if first != s || last != t {
                return Err(PathError::WrongEndpoints(s, t));
            }
        }
        for pair in paths.windows(2) {
            match compare_paths(pair[0].cost, &pair[0].nodes, pair[1].cost, &pair[1].nodes) {
                Ordering::Less => {}
                Ordering::Equal => return Err(PathError::DuplicatePath),
                Ordering::Greater => return Err(PathError::UnorderedPathSet(s, t)),
            }
        }
        Ok(PathSet { flow, k, paths })
    }

    pub fn flow(&self) -> &Flow {
        &self.flow
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    /// Interior nodes of every path, deduplicated, ascending.
    pub fn interior_support(&self) -> Vec<NodeId> {
        let mut nodes: Vec<NodeId> = self
            .paths
            .iter()
            .flat_map(|p| p.interior().iter().copied())
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }
}

/// Set of manufacturer indices present among a path's interior nodes,
/// stored as a bit set. Order-free by construction.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Combo(u64);

impl Combo {
    pub fn empty() -> Self {
        Combo(0)
    }

    pub fn from_members(members: &[usize]) -> Self {
        let mut combo = Combo::empty();
        for &m in members {
            combo.insert(m);
        }
        combo
    }

    pub fn from_bits(bits: u64) -> Self {
        Combo(bits)
    }

    pub fn insert(&mut self, manufacturer: usize) {
        debug_assert!(manufacturer < 64);
        self.0 |= 1 << manufacturer;
    }

    pub fn contains(self, manufacturer: usize) -> bool {
        manufacturer < 64 && self.0 & (1 << manufacturer) != 0
    }

    pub fn size(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// True when every manufacturer in `self` is also in `other`.
    pub fn subset_of(self, other: Combo) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn members(self) -> Vec<usize> {
        (0..64).filter(|&m| self.contains(m)).collect()
    }
}

impl fmt::Debug for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// Manufacturers over the path's interior nodes only; endpoints neglected.
pub fn path_combo(path: &Path, assignment: &Assignment) -> Result<Combo, MetricError> {
    let mut combo = Combo::empty();
    for &node in path.interior() {
        match assignment.manufacturer(node) {
            Some(m) => combo.insert(m),
            None => return Err(MetricError::UnassignedInteriorNode(node)),
        }
    }
    Ok(combo)
}

/// Heap entry ordered by (cost, lexicographic node sequence).
struct RankedPath {
    cost: f64,
    nodes: Vec<NodeId>,
}

impl PartialEq for RankedPath {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for RankedPath {}
impl PartialOrd for RankedPath {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for RankedPath {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_paths(self.cost, &self.nodes, other.cost, &other.nodes)
    }
}

/// Dijkstra that settles each node with its minimum (cost, lexicographic
/// sequence) simple path. With strictly positive edge weights the first
/// settling of a node carries that node's optimal path, so the search is
/// label-setting and the path returned for `target` is the unique minimum
/// in the total order.
fn lex_min_shortest_path(
    topology: &Topology,
    source: NodeId,
    target: NodeId,
    banned_nodes: &[bool],
    banned_edges: &HashSet<(NodeId, NodeId)>,
) -> Option<(f64, Vec<NodeId>)> {
    use std::cmp::Reverse;
    let n = topology.node_count();
    let mut settled = vec![false; n];
    let mut heap: BinaryHeap<Reverse<RankedPath>> = BinaryHeap::new();
    heap.push(Reverse(RankedPath {
        cost: 0.0,
        nodes: vec![source],
    }));
    while let Some(Reverse(entry)) = heap.pop() {
        let here = *entry.nodes.last().unwrap();
        if settled[here.index()] {
            continue;
        }
        settled[here.index()] = true;
        if here == target {
            return Some((entry.cost, entry.nodes));
        }
        for &(next, weight) in topology.neighbors(here) {
            if settled[next.index()]
                || banned_nodes[next.index()]
                || banned_edges.contains(&(here, next))
            {
                continue;
            }
            let mut nodes = entry.nodes.clone();
            nodes.push(next);
            heap.push(Reverse(RankedPath {
                cost: entry.cost + weight,
                nodes,
            }));
        }
    }
    None
}

/// The k cheapest distinct eligible simple paths between the flow endpoints,
/// in (cost, lexicographic sequence) order; fewer when fewer exist.
///
/// Deviation search in the style of Yen: each found path spawns candidate
/// deviations at every prefix node, with the next edges of previously found
/// same-prefix paths banned. Keeping the candidate heap and the spur search
/// on the same total order makes the output the exact first k paths of that
/// order.
pub fn k_shortest_paths(topology: &Topology, flow: &Flow, k: usize) -> Result<PathSet, PathError> {
    use std::cmp::Reverse;
    if k == 0 {
        return Err(PathError::ZeroK);
    }
    let (s, t) = flow.endpoints();
    for endpoint in [s, t] {
        if !topology.contains(endpoint) {
            return Err(PathError::UnknownEndpoint(endpoint, topology.node_count()));
        }
    }
    let n = topology.node_count();
    // The direct edge can only ever form a one-hop path, which is not
    // eligible; ban it outright.
    let base_banned_edges: HashSet<(NodeId, NodeId)> = [(s, t), (t, s)].into_iter().collect();

    let mut found: Vec<Vec<NodeId>> = Vec::new();
    let no_banned_nodes = vec![false; n];
    match lex_min_shortest_path(topology, s, t, &no_banned_nodes, &base_banned_edges) {
        Some((_, nodes)) => found.push(nodes),
        None => return PathSet::new(flow.clone(), k, Vec::new()),
    }

    let mut candidates: BinaryHeap<Reverse<RankedPath>> = BinaryHeap::new();
    let mut queued: HashSet<Vec<NodeId>> = HashSet::new();

    while found.len() < k {
        let prev = found.last().unwrap().clone();
        let mut root_cost = 0.0;
        for spur_index in 0..prev.len() - 1 {
            let spur = prev[spur_index];
            let root = &prev[..=spur_index];
            let mut banned_edges = base_banned_edges.clone();
            for path in &found {
                if path.len() > spur_index + 1 && path[..=spur_index] == *root {
                    banned_edges.insert((spur, path[spur_index + 1]));
                }
            }
            let mut banned_nodes = vec![false; n];
            for &node in &root[..spur_index] {
                banned_nodes[node.index()] = true;
            }
            if let Some((_, spur_nodes)) =
                lex_min_shortest_path(topology, spur, t, &banned_nodes, &banned_edges)
            {
                let mut full: Vec<NodeId> = root[..spur_index].to_vec();
                full.extend(spur_nodes);
                if !queued.contains(&full) {
                    // Recompute the cost over the assembled sequence so
                    // equal paths always carry bit-identical costs.
                    let cost = sequence_cost(topology, &full);
                    queued.insert(full.clone());
                    candidates.push(Reverse(RankedPath { cost, nodes: full }));
                }
            }
            root_cost += topology
                .edge_weight(spur, prev[spur_index + 1])
                .expect("found paths follow edges");
        }
        let _ = root_cost;
        match candidates.pop() {
            Some(Reverse(entry)) => found.push(entry.nodes),
            None => break,
        }
    }

    let paths = found
        .into_iter()
        .map(|nodes| Path::from_nodes(topology, nodes))
        .collect::<Result<Vec<_>, _>>()?;
    PathSet::new(flow.clone(), k, paths)
}

fn sequence_cost(topology: &Topology, nodes: &[NodeId]) -> f64 {
    nodes
        .windows(2)
        .map(|hop| topology.edge_weight(hop[0], hop[1]).expect("adjacent"))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow(s: usize, t: usize) -> Flow {
        Flow::unit(NodeId(s), NodeId(t)).unwrap()
    }

    fn path_nodes(set: &PathSet) -> Vec<Vec<usize>> {
        set.paths()
            .iter()
            .map(|p| p.nodes().iter().map(|n| n.index()).collect())
            .collect()
    }

    #[test]
    fn ring_flow_has_two_routes() {
        let topology = Topology::ring(5).unwrap();
        let set = k_shortest_paths(&topology, &flow(0, 2), 10).unwrap();
        assert_eq!(path_nodes(&set), vec![vec![0, 1, 2], vec![0, 4, 3, 2]]);
    }

    #[test]
    fn adjacent_ring_pair_keeps_only_the_long_way() {
        let topology = Topology::ring(6).unwrap();
        let set = k_shortest_paths(&topology, &flow(0, 1), 10).unwrap();
        assert_eq!(path_nodes(&set), vec![vec![0, 5, 4, 3, 2, 1]]);
    }

    #[test]
    fn complete4_excludes_direct_edge() {
        let topology = Topology::complete(4).unwrap();
        let set = k_shortest_paths(&topology, &flow(0, 1), 10).unwrap();
        assert_eq!(
            path_nodes(&set),
            vec![
                vec![0, 2, 1],
                vec![0, 3, 1],
                vec![0, 2, 3, 1],
                vec![0, 3, 2, 1]
            ]
        );
    }

    #[test]
    fn two_node_graph_has_no_eligible_path() {
        let topology = Topology::new("pair", vec![None, None], &[(0, 1, None)]).unwrap();
        let set = k_shortest_paths(&topology, &flow(0, 1), 5).unwrap();
        assert!(set.paths().is_empty());
    }

    #[test]
    fn k_zero_and_unknown_endpoint_rejected() {
        let topology = Topology::ring(4).unwrap();
        assert!(matches!(
            k_shortest_paths(&topology, &flow(0, 2), 0),
            Err(PathError::ZeroK)
        ));
        assert!(matches!(
            k_shortest_paths(&topology, &flow(0, 9), 3),
            Err(PathError::UnknownEndpoint(..))
        ));
    }

    #[test]
    fn interior_excludes_endpoints() {
        let topology = Topology::ring(5).unwrap();
        let set = k_shortest_paths(&topology, &flow(0, 2), 2).unwrap();
        let interiors: Vec<Vec<usize>> = set
            .paths()
            .iter()
            .map(|p| p.interior().iter().map(|n| n.index()).collect())
            .collect();
        assert_eq!(interiors, vec![vec![1], vec![4, 3]]);
    }

    #[test]
    fn combo_semantics() {
        let assignment = Assignment::new(vec![0, 1, 0, 2, 1], 3).unwrap();
        let topology = Topology::ring(5).unwrap();
        let set = k_shortest_paths(&topology, &flow(0, 2), 2).unwrap();
        let short = path_combo(&set.paths()[0], &assignment).unwrap();
        assert_eq!(short.members(), vec![1]);
        let long = path_combo(&set.paths()[1], &assignment).unwrap();
        assert_eq!(long.members(), vec![1, 2]);
        assert_eq!(long.size(), 2);
    }

    #[test]
    fn combo_is_order_free() {
        let a = Combo::from_members(&[2, 0, 1]);
        let b = Combo::from_members(&[1, 2, 0]);
        assert_eq!(a, b);
        assert_eq!(a.members(), vec![0, 1, 2]);
        assert!(Combo::from_members(&[1]).subset_of(a));
        assert!(!a.subset_of(Combo::from_members(&[1])));
    }

    #[test]
    fn weighted_costs_reorder_paths() {
        // 0-1 heavy, so the geometrically longer route wins.
        let topology = Topology::new(
            "w",
            vec![None; 4],
            &[(0, 1, Some(10.0)), (0, 2, None), (2, 3, None), (3, 1, None), (1, 2, None)],
        )
        .unwrap();
        let set = k_shortest_paths(&topology, &flow(0, 1), 3).unwrap();
        assert_eq!(
            path_nodes(&set),
            vec![vec![0, 2, 1], vec![0, 2, 3, 1]]
        );
        assert_eq!(set.paths()[0].cost(), 2.0);
        assert_eq!(set.paths()[1].cost(), 3.0);
    }

    #[test]
    fn path_set_rejects_one_hop() {
        let topology = Topology::ring(4).unwrap();
        let direct = Path::from_nodes(&topology, vec![NodeId(0), NodeId(1)]).unwrap();
        assert!(matches!(
            PathSet::new(flow(0, 1), 3, vec![direct]),
            Err(PathError::OneHopPath)
        ));
    }
}
