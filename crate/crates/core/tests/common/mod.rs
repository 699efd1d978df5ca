//! Independent oracles for the integration suites: exhaustive simple-path
//! enumeration, a literal transcription of the scoring procedure, and
//! brute-force assignment search. Nothing here calls the library's path
//! enumeration or solver code paths.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use netsov::metric::Rational;
use netsov::topology::{enumerate_flows, Flow, FlowSet, NodeId, Topology};

/// Every simple path from `s` to `t`, by exhaustive depth-first search.
pub fn all_simple_paths(topology: &Topology, s: NodeId, t: NodeId) -> Vec<Vec<NodeId>> {
    fn dfs(
        topology: &Topology,
        t: NodeId,
        current: &mut Vec<NodeId>,
        on_path: &mut Vec<bool>,
        out: &mut Vec<Vec<NodeId>>,
    ) {
        let here = *current.last().unwrap();
        if here == t {
            out.push(current.clone());
            return;
        }
        for &(next, _) in topology.neighbors(here) {
            if on_path[next.index()] {
                continue;
            }
            current.push(next);
            on_path[next.index()] = true;
            dfs(topology, t, current, on_path, out);
            on_path[next.index()] = false;
            current.pop();
        }
    }
    let mut out = Vec::new();
    let mut on_path = vec![false; topology.node_count()];
    on_path[s.index()] = true;
    dfs(topology, t, &mut vec![s], &mut on_path, &mut out);
    out
}

pub fn sequence_cost(topology: &Topology, nodes: &[NodeId]) -> f64 {
    nodes
        .windows(2)
        .map(|hop| topology.edge_weight(hop[0], hop[1]).expect("adjacent"))
        .sum()
}

/// All eligible paths (multi-hop only) sorted by (cost, lexicographic
/// sequence) — the reference enumeration the library must reproduce.
pub fn eligible_paths_sorted(topology: &Topology, s: NodeId, t: NodeId) -> Vec<Vec<NodeId>> {
    let mut paths: Vec<Vec<NodeId>> = all_simple_paths(topology, s, t)
        .into_iter()
        .filter(|p| p.len() > 2)
        .collect();
    paths.sort_by(|a, b| {
        sequence_cost(topology, a)
            .total_cmp(&sequence_cost(topology, b))
            .then_with(|| a.cmp(b))
    });
    paths
}

/// Literal transcription of the scoring procedure: take the first k paths,
/// find each path's interior manufacturer set, remove paths repeating an
/// earlier set, and sum inverse set sizes.
pub fn literal_flow_reward(
    paths_in_order: &[Vec<NodeId>],
    k: usize,
    manufacturer_of: &[usize],
) -> Rational {
    let mut seen: Vec<BTreeSet<usize>> = Vec::new();
    let mut reward = Rational::zero();
    for path in paths_in_order.iter().take(k) {
        let combo: BTreeSet<usize> = path[1..path.len() - 1]
            .iter()
            .map(|n| manufacturer_of[n.index()])
            .collect();
        if seen.contains(&combo) {
            continue;
        }
        reward += Rational::new(1, combo.len() as i128);
        seen.push(combo);
    }
    reward
}

/// Eligible-path lists per flow, for reuse across many assignments.
pub fn oracle_paths_per_flow(topology: &Topology, flows: &FlowSet) -> Vec<Vec<Vec<NodeId>>> {
    flows
        .iter()
        .map(|flow| {
            let (s, t) = flow.endpoints();
            eligible_paths_sorted(topology, s, t)
        })
        .collect()
}

/// `sum(w_r * pi_r)` via the literal procedure.
pub fn oracle_objective(
    flows: &FlowSet,
    paths_per_flow: &[Vec<Vec<NodeId>>],
    k: usize,
    manufacturer_of: &[usize],
) -> Rational {
    flows
        .iter()
        .zip(paths_per_flow)
        .fold(Rational::zero(), |acc, (flow, paths)| {
            acc + flow.weight() * literal_flow_reward(paths, k, manufacturer_of)
        })
}

/// Exhaustive maximum over every assignment vector, in lexicographic
/// order; returns the value and the first (lexicographically smallest)
/// maximizer.
pub fn brute_force_best(
    flows: &FlowSet,
    paths_per_flow: &[Vec<Vec<NodeId>>],
    node_count: usize,
    num_manufacturers: usize,
    k: usize,
) -> (Rational, Vec<usize>) {
    let mut assignment = vec![0usize; node_count];
    let mut best_value: Option<Rational> = None;
    let mut best_assignment = assignment.clone();
    loop {
        let value = oracle_objective(flows, paths_per_flow, k, &assignment);
        let improved = match &best_value {
            Some(best) => value > *best,
            None => true,
        };
        if improved {
            best_value = Some(value);
            best_assignment = assignment.clone();
        }
        // Odometer step: rightmost digit fastest = lexicographic ascending.
        let mut pos = node_count;
        loop {
            if pos == 0 {
                return (best_value.unwrap(), best_assignment);
            }
            pos -= 1;
            if assignment[pos] + 1 < num_manufacturers {
                assignment[pos] += 1;
                for slot in assignment.iter_mut().skip(pos + 1) {
                    *slot = 0;
                }
                break;
            }
        }
    }
}

/// Combo-enumeration oracle for the flow-reward bound: one reward per
/// non-empty manufacturer subset.
pub fn upper_bound_by_enumeration(num_manufacturers: usize) -> Rational {
    let mut bound = Rational::zero();
    for bits in 1u64..(1 << num_manufacturers) {
        bound += Rational::new(1, i128::from(bits.count_ones()));
    }
    bound
}

/// Random connected simple graph: a random spanning tree plus a sprinkle of
/// extra edges. Unit weights.
pub fn random_connected_topology(rng: &mut ChaCha8Rng, n: usize, extra_edges: usize) -> Topology {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        let child = order[i];
        let (a, b) = if parent < child { (parent, child) } else { (child, parent) };
        edges.insert((a, b));
    }
    let mut attempts = 0;
    let mut added = 0;
    while added < extra_edges && attempts < extra_edges * 20 {
        attempts += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let pair = if a < b { (a, b) } else { (b, a) };
        if edges.insert(pair) {
            added += 1;
        }
    }
    let edge_list: Vec<(usize, usize, Option<f64>)> =
        edges.into_iter().map(|(a, b)| (a, b, None)).collect();
    Topology::new(format!("random-{n}"), vec![None; n], &edge_list).unwrap()
}

/// Random assignment vector.
pub fn random_assignment_vector(
    rng: &mut ChaCha8Rng,
    node_count: usize,
    num_manufacturers: usize,
) -> Vec<usize> {
    (0..node_count)
        .map(|_| rng.gen_range(0..num_manufacturers))
        .collect()
}

/// The worked-example topology shipped under `data/`.
pub fn example_8node() -> Topology {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../data/example_8node.json"
    ))
    .expect("example topology data file");
    Topology::parse(&text).expect("example topology parses")
}

/// The worked-example assignment: interior manufacturers (R, Y, B) = (0, 1,
/// 2); endpoints on 0.
pub fn example_8node_assignment() -> Vec<usize> {
    vec![0, 0, 1, 1, 2, 2, 0, 0]
}

pub fn unit_flows(topology: &Topology) -> FlowSet {
    enumerate_flows(topology, None).unwrap()
}

pub fn single_flow(s: usize, t: usize) -> FlowSet {
    FlowSet::new(vec![Flow::unit(NodeId(s), NodeId(t)).unwrap()]).unwrap()
}
