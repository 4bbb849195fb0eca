//! Seeded random feed-forward networks for cross-validation corpora.

use rand::Rng;

use crate::netlist::{
    FabricNetwork, GroundingMode, NeuronNode, NodeRole, ResistorPalette, SynapseEdge,
    WeightAssignment, INPUT_COUNT,
};

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn random_edge(rng: &mut impl Rng, from: &str, to: &str) -> SynapseEdge {
    let n_opts = rng.gen_range(1..=3);
    let options = (0..n_opts).map(|_| log_uniform(rng, 1e3, 1e6)).collect();
    SynapseEdge::new(from, to, ResistorPalette::new(options))
}

/// Random valid network with three inputs and at most `max_nodes` nodes in
/// total, plus a random in-bounds assignment. Every RC node gets at least
/// one input edge from the previous layer; nodes of the last layer are outputs.
pub fn random_network(
    rng: &mut impl Rng,
    max_nodes: usize,
    mode: GroundingMode,
) -> (FabricNetwork, WeightAssignment) {
    assert!(max_nodes > INPUT_COUNT, "need room for at least one RC node");
    let rc = rng.gen_range(1..=max_nodes - INPUT_COUNT);
    let depth = rng.gen_range(1..=rc.min(3));
    // Split `rc` nodes over `depth` layers, each non-empty.
    let mut sizes = vec![1; depth];
    for _ in depth..rc {
        let k = rng.gen_range(0..depth);
        sizes[k] += 1;
    }

    let mut nodes: Vec<NeuronNode> = ["A", "B", "C"].iter().map(|&id| NeuronNode::input(id)).collect();
    let mut layers: Vec<Vec<String>> = vec![vec!["A".into(), "B".into(), "C".into()]];
    let mut counter = 0;
    for (k, &size) in sizes.iter().enumerate() {
        let role = if k + 1 == depth { NodeRole::Output } else { NodeRole::Hidden };
        let mut layer = Vec::with_capacity(size);
        for _ in 0..size {
            counter += 1;
            let id = format!("R{counter}");
            let mut node = NeuronNode::rc(id.clone(), k + 1, role, log_uniform(rng, 1e4, 1e6));
            node.capacitance = Some(log_uniform(rng, 1e-8, 1e-6));
            nodes.push(node);
            layer.push(id);
        }
        layers.push(layer);
    }

    let mut edges = Vec::new();
    for pair in layers.windows(2) {
        let (src, dst) = (&pair[0], &pair[1]);
        for to in dst {
            let forced = rng.gen_range(0..src.len());
            for (i, from) in src.iter().enumerate() {
                if i == forced || rng.gen_bool(0.6) {
                    edges.push(random_edge(rng, from, to));
                }
            }
        }
        // Every source also feeds at least one node, so no terminal floats alone.
        for from in src {
            if !edges.iter().any(|e: &SynapseEdge| &e.from == from) {
                let to = &dst[rng.gen_range(0..dst.len())];
                edges.push(random_edge(rng, from, to));
            }
        }
    }
    let selected = edges.iter().map(|e| rng.gen_range(0..e.options.len())).collect();
    let mut network = FabricNetwork::new(nodes, edges);
    network.grounding_mode = mode;
    (network, WeightAssignment { selected })
}
