//! Shared fixtures for the benchmark targets.

use netsov::topology::{enumerate_flows, FlowSet, Topology};

/// Mid-size planning fixture: a mesh-heavy 10-node graph with any-to-any
/// unit traffic.
pub fn mesh_fixture() -> (Topology, FlowSet) {
    let topology = Topology::complete(10).unwrap();
    let flows = enumerate_flows(&topology, None).unwrap();
    (topology, flows)
}

/// Sparse fixture comparable to a national core network.
pub fn core_fixture() -> (Topology, FlowSet) {
    let edges: Vec<(usize, usize, Option<f64>)> = vec![
        (0, 1, None),
        (0, 2, None),
        (0, 3, None),
        (1, 2, None),
        (2, 5, None),
        (3, 4, None),
        (4, 5, None),
        (4, 7, None),
        (5, 6, None),
        (6, 7, None),
        (6, 10, None),
        (7, 8, None),
        (8, 9, None),
        (9, 10, None),
    ];
    let topology = Topology::new("core-11", vec![None; 11], &edges).unwrap();
    let flows = enumerate_flows(&topology, None).unwrap();
    (topology, flows)
}
