//! Shipped defaults for the reference 3-4-4-2 network: its learned resistor
//! selection, target table, touch scenarios and wearability scenarios.

use crate::netlist::{build_reference_network, FabricNetwork, TruthTable, WeightAssignment};
use crate::perturbation::PerturbationSpec;

/// Output of `learn` with the default config (seed 7, 20 restarts).
pub const REFERENCE_ASSIGNMENT_JSON: &str = include_str!("../data/reference_assignment.json");

pub fn reference_assignment() -> WeightAssignment {
    WeightAssignment::parse(&build_reference_network(), REFERENCE_ASSIGNMENT_JSON)
        .expect("shipped assignment matches the reference network")
}

/// Reference network with the shipped selection stitched in.
pub fn reference_network_learned() -> FabricNetwork {
    build_reference_network()
        .with_assignment(&reference_assignment())
        .expect("shipped assignment is in range")
}

pub fn reference_target() -> TruthTable {
    TruthTable::reference()
}

/// Stationary arm, 6 walking iterations and 32 walking iterations, as
/// default jitter scaled by 1, 2 and 4. All share one seed so each scenario's
/// draws are a scaled copy of the previous one's.
pub fn wearability_scenarios(samples: usize, seed: u64) -> Vec<PerturbationSpec> {
    let base = PerturbationSpec::new(samples, seed);
    vec![
        base.scaled(1.0, "stationary"),
        base.scaled(2.0, "6 walking iterations"),
        base.scaled(4.0, "32 walking iterations"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::evaluate_truth_table;

    #[test]
    fn shipped_assignment_realizes_target() {
        let net = build_reference_network();
        let realized = evaluate_truth_table(&net, &reference_assignment()).unwrap();
        assert_eq!(realized.table, reference_target());
    }

    #[test]
    fn scenarios_are_nested() {
        let s = wearability_scenarios(10, 3);
        assert_eq!(s.len(), 3);
        assert!(s.windows(2).all(|w| w[0].resistor_tolerance < w[1].resistor_tolerance));
        assert!(s.iter().all(|x| x.seed == 3));
    }
}
