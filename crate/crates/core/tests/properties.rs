//! Structural invariants checked over randomized instances: ordering and
//! prefix behavior of path sets, symmetry and monotonicity of the score,
//! and anti-monotonicity of failure scenarios.

mod common;

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use netsov::failsim::{failure_scenarios, simulate, EvalMode};
use netsov::heuristics::{centrality_assignment, CentralityKind};
use netsov::metric::{flow_reward, flow_reward_upper_bound, psd_score, Assignment, Rational};
use netsov::paths::{k_shortest_paths, path_combo};
use netsov::topology::{enumerate_flows, Flow, NodeId, Topology};

use common::{random_assignment_vector, random_connected_topology};

fn seeded_topology(seed: u64, n: usize, extra: usize) -> Topology {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_connected_topology(&mut rng, n, extra)
}

proptest! {
    #[test]
    fn topology_round_trip(seed in any::<u64>(), n in 3usize..10, extra in 0usize..6) {
        let topology = seeded_topology(seed, n, extra);
        let again = Topology::parse(&topology.render()).unwrap();
        prop_assert_eq!(topology, again);
    }

    #[test]
    fn flow_enumeration_is_lexicographic(seed in any::<u64>(), n in 3usize..9) {
        let topology = seeded_topology(seed, n, 2);
        let flows = enumerate_flows(&topology, None).unwrap();
        prop_assert_eq!(flows.len(), n * (n - 1) / 2);
        let pairs: Vec<(NodeId, NodeId)> = flows.iter().map(|f| f.endpoints()).collect();
        let mut sorted = pairs.clone();
        sorted.sort();
        prop_assert_eq!(pairs, sorted);
    }

    #[test]
    fn paths_grow_as_prefixes(seed in any::<u64>(), n in 4usize..9, extra in 0usize..5) {
        let topology = seeded_topology(seed, n, extra);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF00D);
        let s = rng.gen_range(0..n);
        let mut t = rng.gen_range(0..n);
        while t == s { t = rng.gen_range(0..n); }
        let flow = Flow::unit(NodeId(s), NodeId(t)).unwrap();
        let mut previous: Vec<Vec<NodeId>> = Vec::new();
        for k in 1..=8 {
            let set = k_shortest_paths(&topology, &flow, k).unwrap();
            let nodes: Vec<Vec<NodeId>> = set.paths().iter().map(|p| p.nodes().to_vec()).collect();
            prop_assert!(nodes.len() >= previous.len());
            prop_assert_eq!(&nodes[..previous.len()], previous.as_slice(), "k={}", k);
            for pair in set.paths().windows(2) {
                prop_assert!(pair[0].cost() <= pair[1].cost());
            }
            previous = nodes;
        }
    }

    #[test]
    fn combo_invariant_under_reversal(seed in any::<u64>(), n in 4usize..9) {
        let topology = seeded_topology(seed, n, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xBEEF);
        let m = rng.gen_range(1..=4);
        let assignment = Assignment::new(random_assignment_vector(&mut rng, n, m), m).unwrap();
        let s = rng.gen_range(0..n);
        let mut t = rng.gen_range(0..n);
        while t == s { t = rng.gen_range(0..n); }
        let flow = Flow::unit(NodeId(s), NodeId(t)).unwrap();
        let set = k_shortest_paths(&topology, &flow, 5).unwrap();
        for path in set.paths() {
            let forward = path_combo(path, &assignment).unwrap();
            let mut reversed_nodes = path.nodes().to_vec();
            reversed_nodes.reverse();
            let reversed =
                netsov::paths::Path::from_nodes(&topology, reversed_nodes).unwrap();
            prop_assert_eq!(forward, path_combo(&reversed, &assignment).unwrap());
        }
    }

    #[test]
    fn psd_invariant_under_label_permutation(seed in any::<u64>(), n in 4usize..8) {
        let topology = seeded_topology(seed, n, 3);
        let flows = enumerate_flows(&topology, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xCAFE);
        let m = rng.gen_range(2..=3);
        let vector = random_assignment_vector(&mut rng, n, m);
        let assignment = Assignment::new(vector.clone(), m).unwrap();
        // Rotate labels: sigma(x) = (x + 1) mod m.
        let rotated: Vec<usize> = vector.iter().map(|&x| (x + 1) % m).collect();
        let permuted = Assignment::new(rotated, m).unwrap();
        let k = rng.gen_range(1..=5);
        let a = psd_score(&topology, &flows, &assignment, k).unwrap();
        let b = psd_score(&topology, &flows, &permuted, k).unwrap();
        prop_assert_eq!(a.psd, b.psd);
    }

    #[test]
    fn psd_monotone_in_k(seed in any::<u64>(), n in 4usize..8) {
        let topology = seeded_topology(seed, n, 4);
        let flows = enumerate_flows(&topology, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD00D);
        let m = rng.gen_range(1..=4);
        let assignment = Assignment::new(random_assignment_vector(&mut rng, n, m), m).unwrap();
        let mut previous: Option<Rational> = None;
        for k in [1, 2, 3, 5, 8] {
            let report = psd_score(&topology, &flows, &assignment, k).unwrap();
            if let Some(prev) = previous {
                prop_assert!(report.psd >= prev, "k={}", k);
            }
            previous = Some(report.psd);
        }
    }

    #[test]
    fn flow_reward_respects_bounds(seed in any::<u64>(), n in 4usize..9) {
        let topology = seeded_topology(seed, n, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
        let m = rng.gen_range(1..=4);
        let assignment = Assignment::new(random_assignment_vector(&mut rng, n, m), m).unwrap();
        let bound = flow_reward_upper_bound(m).unwrap();
        let limit = 1u64 << m;
        for flow in enumerate_flows(&topology, None).unwrap().iter() {
            let set = k_shortest_paths(&topology, flow, 6).unwrap();
            let score = flow_reward(&set, &assignment).unwrap();
            prop_assert!(score.reward <= bound);
            let kept = score.paths.iter().filter(|p| p.kept()).count();
            prop_assert!(score.reward <= Rational::from_integer(kept as i128));
            prop_assert!((kept as u64) < limit, "kept combos exceed 2^M - 1");
        }
    }

    #[test]
    fn failure_anti_monotonicity(seed in any::<u64>(), n in 4usize..8) {
        let topology = seeded_topology(seed, n, 3);
        let flows = enumerate_flows(&topology, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xFA11);
        let m = rng.gen_range(2..=4);
        let assignment = Assignment::new(random_assignment_vector(&mut rng, n, m), m).unwrap();
        let scenarios = failure_scenarios(m).unwrap();
        let reports: Vec<_> = scenarios
            .iter()
            .map(|sc| {
                simulate(&topology, &assignment, &flows, sc, EvalMode::Residual, None).unwrap()
            })
            .collect();
        for (i, a) in scenarios.iter().enumerate() {
            for (j, b) in scenarios.iter().enumerate() {
                let a_superset = b.members().iter().all(|mm| a.members().contains(mm));
                if a_superset {
                    for (fa, fb) in reports[i].flow_success.iter().zip(&reports[j].flow_success) {
                        prop_assert!(!fa || *fb, "success under bigger failure implies success under smaller");
                    }
                }
            }
        }
    }
}

#[test]
fn ring_flows_never_exceed_two_paths() {
    for n in [4, 6, 9, 13] {
        let topology = Topology::ring(n).unwrap();
        let flows = enumerate_flows(&topology, None).unwrap();
        for k in [2, 5, 10, 50] {
            for flow in flows.iter() {
                let set = k_shortest_paths(&topology, flow, k).unwrap();
                assert!(set.paths().len() <= 2, "ring({n}) k={k}");
            }
        }
    }
}

#[test]
fn vertex_transitive_graphs_give_identical_heuristic_assignments() {
    for topology in [Topology::ring(8).unwrap(), Topology::complete(7).unwrap()] {
        let flows = enumerate_flows(&topology, None).unwrap();
        for m in [2, 3] {
            let nd = centrality_assignment(&topology, CentralityKind::NodalDegree, &flows, m)
                .unwrap();
            let bwc = centrality_assignment(&topology, CentralityKind::Betweenness, &flows, m)
                .unwrap();
            let cc =
                centrality_assignment(&topology, CentralityKind::Closeness, &flows, m).unwrap();
            assert_eq!(nd, bwc, "{} m={m}", topology.name());
            assert_eq!(nd, cc, "{} m={m}", topology.name());
        }
    }
}

#[test]
fn dedup_is_order_stable_and_idempotent() {
    // All paths share one combo: first kept, all later ones point at it.
    let topology = Topology::complete(5).unwrap();
    let flow = Flow::unit(NodeId(0), NodeId(4)).unwrap();
    let set = k_shortest_paths(&topology, &flow, 10).unwrap();
    let assignment = Assignment::uniform(5, 2).unwrap();
    let score = flow_reward(&set, &assignment).unwrap();
    assert!(score.paths[0].kept());
    for later in &score.paths[1..] {
        assert_eq!(later.duplicate_of, Some(0));
    }
}
