#![allow(dead_code)]

use fabric_snn::netlist::{
    FabricNetwork, NeuronNode, NodeRole, ResistorPalette, SynapseEdge, WeightAssignment,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SINGLE_EDGE: f64 = 3.6e3;
pub const SINGLE_LEAK: f64 = 33e3;
pub const SINGLE_CAP: f64 = 220e-9;

/// One output node X fed from A through 3.6k, with a 33k leak and 220 nF.
pub fn single_node_network() -> FabricNetwork {
    let mut x = NeuronNode::rc("X", 1, NodeRole::Output, SINGLE_LEAK);
    x.capacitance = Some(SINGLE_CAP);
    let nodes = vec![NeuronNode::input("A"), NeuronNode::input("B"), NeuronNode::input("C"), x];
    let edges = vec![SynapseEdge::new("A", "X", ResistorPalette::new(vec![SINGLE_EDGE, 33e3, 680e3]))];
    FabricNetwork::new(nodes, edges)
}

pub fn random_assignment(network: &FabricNetwork, seed: u64) -> WeightAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    WeightAssignment {
        selected: network.edges.iter().map(|e| rng.gen_range(0..e.options.len())).collect(),
    }
}
