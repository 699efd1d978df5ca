//! Graph data model, topology file ingestion, synthetic generators, and
//! any-to-any flow enumeration.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::Rational;

/// Dense node index in `0..|V|`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Undirected edge, stored with `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub weight: f64,
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("topology document is not valid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("topology needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("node at position {position} has id {found}, expected dense id {position}")]
    NonDenseNodeId { position: usize, found: usize },
    #[error("edge #{index} ({a}, {b}) references a node outside 0..{nodes}")]
    UnknownNode {
        index: usize,
        a: usize,
        b: usize,
        nodes: usize,
    },
    #[error("edge #{index} is a self-loop on node {node}")]
    SelfLoop { index: usize, node: usize },
    #[error("duplicate edge ({a}, {b})")]
    DuplicateEdge { a: usize, b: usize },
    #[error("edge #{index} ({a}, {b}) has non-positive or non-finite weight {weight}")]
    BadEdgeWeight {
        index: usize,
        a: usize,
        b: usize,
        weight: f64,
    },
    #[error("ring topology needs n >= 3, got {0}")]
    RingTooSmall(usize),
    #[error("complete topology needs n >= 2, got {0}")]
    CompleteTooSmall(usize),
}

/// Simple undirected graph with optional node labels and positive edge
/// weights (default 1.0, interpreted as hop cost). Immutable after
/// construction; safe to share read-only across parallel workers.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    name: String,
    labels: Vec<Option<String>>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, f64)>>,
}

impl Topology {
    /// Build a validated topology. `edges` entries are `(a, b, weight)` with
    /// `weight = None` meaning unit cost.
    pub fn new(
        name: impl Into<String>,
        labels: Vec<Option<String>>,
        edges: &[(usize, usize, Option<f64>)],
    ) -> Result<Self, TopologyError> {
        let n = labels.len();
        if n < 2 {
            return Err(TopologyError::TooFewNodes(n));
        }
        let mut normalized: Vec<Edge> = Vec::with_capacity(edges.len());
        for (index, &(a, b, weight)) in edges.iter().enumerate() {
            if a >= n || b >= n {
                return Err(TopologyError::UnknownNode { index, a, b, nodes: n });
            }
            if a == b {
                return Err(TopologyError::SelfLoop { index, node: a });
            }
            let weight = weight.unwrap_or(1.0);
            if !weight.is_finite() || weight <= 0.0 {
                return Err(TopologyError::BadEdgeWeight { index, a, b, weight });
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            normalized.push(Edge {
                a: NodeId(lo),
                b: NodeId(hi),
                weight,
            });
        }
        normalized.sort_by_key(|e| (e.a, e.b));
        for pair in normalized.windows(2) {
            if pair[0].a == pair[1].a && pair[0].b == pair[1].b {
                return Err(TopologyError::DuplicateEdge {
                    a: pair[0].a.index(),
                    b: pair[0].b.index(),
                });
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for edge in &normalized {
            adjacency[edge.a.index()].push((edge.b, edge.weight));
            adjacency[edge.b.index()].push((edge.a, edge.weight));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(node, _)| node);
        }
        Ok(Topology {
            name: name.into(),
            labels,
            edges: normalized,
            adjacency,
        })
    }

    /// Cycle graph: node `i` connected to `(i + 1) mod n`.
    pub fn ring(n: usize) -> Result<Self, TopologyError> {
        if n < 3 {
            return Err(TopologyError::RingTooSmall(n));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, None)).collect();
        Self::new(format!("ring-{n}"), vec![None; n], &edges)
    }

    /// Complete graph on `n` nodes with `n(n-1)/2` edges.
    pub fn complete(n: usize) -> Result<Self, TopologyError> {
        if n < 2 {
            return Err(TopologyError::CompleteTooSmall(n));
        }
        let mut edges = Vec::with_capacity(n * (n - 1) / 2);
        for a in 0..n {
            for b in (a + 1)..n {
                edges.push((a, b, None));
            }
        }
        Self::new(format!("complete-{n}"), vec![None; n], &edges)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count()).map(NodeId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.index() < self.node_count()
    }

    pub fn label(&self, node: NodeId) -> Option<&str> {
        self.labels.get(node.index()).and_then(|l| l.as_deref())
    }

    /// Label if present, otherwise the numeric id.
    pub fn display_name(&self, node: NodeId) -> String {
        match self.label(node) {
            Some(l) => l.to_string(),
            None => node.to_string(),
        }
    }

    /// Node id for a display label, if any node carries it.
    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.labels
            .iter()
            .position(|l| l.as_deref() == Some(label))
            .map(NodeId)
    }

    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[node.index()]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node.index()].len()
    }

    pub fn edge_weight(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.adjacency[a.index()]
            .iter()
            .find(|&&(node, _)| node == b)
            .map(|&(_, w)| w)
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edge_weight(a, b).is_some()
    }

    /// True when every node can reach every other node.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![NodeId(0)];
        seen[0] = true;
        let mut count = 1;
        while let Some(node) = stack.pop() {
            for &(next, _) in self.neighbors(node) {
                if !seen[next.index()] {
                    seen[next.index()] = true;
                    count += 1;
                    stack.push(next);
                }
            }
        }
        count == n
    }

    /// Parse the JSON topology document format.
    pub fn parse(text: &str) -> Result<Self, TopologyError> {
        let doc: TopologyDoc = serde_json::from_str(text)?;
        let mut labels = Vec::with_capacity(doc.nodes.len());
        for (position, node) in doc.nodes.iter().enumerate() {
            if node.id != position {
                return Err(TopologyError::NonDenseNodeId {
                    position,
                    found: node.id,
                });
            }
            labels.push(node.label.clone());
        }
        let edges: Vec<_> = doc
            .edges
            .iter()
            .map(|e| (e.a, e.b, e.weight))
            .collect();
        Self::new(doc.name, labels, &edges)
    }

    /// Render to the JSON topology document format. `parse(render(t)) == t`.
    pub fn render(&self) -> String {
        let doc = TopologyDoc {
            name: self.name.clone(),
            nodes: (0..self.node_count())
                .map(|id| NodeDoc {
                    id,
                    label: self.labels[id].clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    a: e.a.index(),
                    b: e.b.index(),
                    weight: Some(e.weight),
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("topology serializes");
        out.push('\n');
        out
    }
}

#[derive(Serialize, Deserialize)]
struct TopologyDoc {
    name: String,
    nodes: Vec<NodeDoc>,
    edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    a: usize,
    b: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("flow endpoints must differ, got ({0}, {0})")]
    EqualEndpoints(NodeId),
    #[error("flow weight must be non-negative, got {0}")]
    NegativeWeight(String),
    #[error("duplicate flow for pair ({0}, {1})")]
    DuplicatePair(NodeId, NodeId),
    #[error("weight table references pair ({0}, {1}) outside the topology")]
    UnknownPair(usize, usize),
    #[error("weight table pair ({0}, {1}) is not a valid pair")]
    InvalidPair(usize, usize),
    #[error("weights document is not valid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("unsupported weight literal {0:?}")]
    BadWeightLiteral(String),
}

/// Traffic demand between an unordered pair of distinct nodes. Bidirectional
/// traffic is modeled as one flow per unordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    a: NodeId,
    b: NodeId,
    weight: Rational,
}

impl Flow {
    pub fn new(s: NodeId, t: NodeId, weight: Rational) -> Result<Self, FlowError> {
        if s == t {
            return Err(FlowError::EqualEndpoints(s));
        }
        if weight < Rational::from_integer(0) {
            return Err(FlowError::NegativeWeight(weight.to_string()));
        }
        let (a, b) = if s < t { (s, t) } else { (t, s) };
        Ok(Flow { a, b, weight })
    }

    pub fn unit(s: NodeId, t: NodeId) -> Result<Self, FlowError> {
        Self::new(s, t, Rational::from_integer(1))
    }

    /// Endpoints in canonical (smaller, larger) order.
    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.a, self.b)
    }

    pub fn weight(&self) -> &Rational {
        &self.weight
    }
}

/// Flows unique by unordered endpoint pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSet {
    flows: Vec<Flow>,
}

impl FlowSet {
    pub fn new(flows: Vec<Flow>) -> Result<Self, FlowError> {
        let mut pairs: Vec<(NodeId, NodeId)> = flows.iter().map(|f| f.endpoints()).collect();
        pairs.sort();
        for pair in pairs.windows(2) {
            if pair[0] == pair[1] {
                return Err(FlowError::DuplicatePair(pair[0].0, pair[0].1));
            }
        }
        Ok(FlowSet { flows })
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Flow> {
        self.flows.iter()
    }

    pub fn total_weight(&self) -> Rational {
        self.flows
            .iter()
            .fold(Rational::from_integer(0), |acc, f| acc + f.weight())
    }
}

/// Per-pair flow weight overrides; pairs absent from the table keep weight 1.
#[derive(Debug, Clone, Default)]
pub struct WeightTable {
    entries: Vec<(usize, usize, Rational)>,
}

impl WeightTable {
    pub fn new(entries: Vec<(usize, usize, Rational)>) -> Self {
        WeightTable { entries }
    }

    /// Parse the JSON weights document: `{"pairs": [{"a", "b", "weight"}]}`.
    pub fn parse(text: &str) -> Result<Self, FlowError> {
        let doc: WeightsDoc = serde_json::from_str(text)?;
        let mut entries = Vec::with_capacity(doc.pairs.len());
        for pair in doc.pairs {
            let weight = rational_from_json_number(&pair.weight)?;
            entries.push((pair.a, pair.b, weight));
        }
        Ok(WeightTable { entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Deserialize)]
struct WeightsDoc {
    pairs: Vec<WeightEntryDoc>,
}

#[derive(Deserialize)]
struct WeightEntryDoc {
    a: usize,
    b: usize,
    weight: serde_json::Number,
}

/// Exact rational for a JSON number literal, via its decimal rendering.
pub fn rational_from_json_number(number: &serde_json::Number) -> Result<Rational, FlowError> {
    if let Some(i) = number.as_i64() {
        return Ok(Rational::from_integer(i as i128));
    }
    parse_decimal_rational(&number.to_string())
        .ok_or_else(|| FlowError::BadWeightLiteral(number.to_string()))
}

/// Parse a decimal literal (optionally with exponent) into an exact rational.
pub fn parse_decimal_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = text[pos + 1..].parse().ok()?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    let (mantissa, negative) = match mantissa.strip_prefix('-') {
        Some(rest) => (rest, true),
        None => (mantissa.strip_prefix('+').unwrap_or(mantissa), false),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits: String = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut numer: i128 = digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let mut value = Rational::from_integer(numer);
    let ten = Rational::from_integer(10);
    match scale.cmp(&0) {
        std::cmp::Ordering::Greater => {
            for _ in 0..scale {
                value *= &ten;
            }
        }
        std::cmp::Ordering::Less => {
            for _ in 0..(-scale) {
                value /= &ten;
            }
        }
        std::cmp::Ordering::Equal => {}
    }
    Some(value)
}

/// One flow per unordered node pair, in lexicographic pair order. Pairs not
/// covered by the optional weight table default to weight 1.
pub fn enumerate_flows(
    topology: &Topology,
    weights: Option<&WeightTable>,
) -> Result<FlowSet, FlowError> {
    let n = topology.node_count();
    let mut table = vec![None; n * (n - 1) / 2];
    let pair_slot = |a: usize, b: usize| -> usize {
        // index of (a, b) with a < b in lexicographic pair order
        a * n - a * (a + 1) / 2 + (b - a - 1)
    };
    if let Some(weights) = weights {
        for &(a, b, ref weight) in &weights.entries {
            if a == b {
                return Err(FlowError::InvalidPair(a, b));
            }
            if a >= n || b >= n {
                return Err(FlowError::UnknownPair(a, b));
            }
            if *weight < Rational::from_integer(0) {
                return Err(FlowError::NegativeWeight(weight.to_string()));
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            table[pair_slot(lo, hi)] = Some(weight.clone());
        }
    }
    let mut flows = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            let weight = table[pair_slot(a, b)]
                .take()
                .unwrap_or_else(|| Rational::from_integer(1));
            flows.push(Flow::new(NodeId(a), NodeId(b), weight)?);
        }
    }
    FlowSet::new(flows)
}
