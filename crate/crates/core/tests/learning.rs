mod common;

use common::random_assignment;
use fabric_snn::learning::{check_realizable, learn, table_error, LearningConfig, LearningError, SearchStrategy};
use fabric_snn::netlist::{build_reference_network, GroundingMode, TruthTable};
use fabric_snn::oracle::exhaustive_assignments;
use fabric_snn::solver::evaluate_truth_table;
use fabric_snn::synth::random_network;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quick(seed: u64) -> LearningConfig {
    LearningConfig { seed, restarts: 4, max_iterations: 200, ..LearningConfig::default() }
}

#[test]
fn recovers_tables_of_random_selections() {
    let net = build_reference_network();
    let mut recovered = 0;
    for seed in 0..100 {
        let hidden = random_assignment(&net, 1000 + seed);
        let target = evaluate_truth_table(&net, &hidden).unwrap().table;
        let result = learn(&net, &target, &quick(seed)).unwrap();
        let realized = evaluate_truth_table(&net, &result.assignment).unwrap().table;
        assert_eq!(table_error(&realized, &target), result.error);
        if result.error == 0 {
            recovered += 1;
        }
    }
    assert!(recovered >= 95, "recovered {recovered}/100");
}

#[test]
fn matches_exhaustive_search_on_small_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 40 {
        let (net, _) = random_network(&mut rng, 6, GroundingMode::GroundedZeros);
        let space: usize = net.edges.iter().map(|e| e.options.len()).product();
        if space > 20_000 {
            continue;
        }
        let width = net.output_ids().len();
        let rows = (0..8).map(|_| (0..width).map(|_| rng.gen_bool(0.5)).collect()).collect();
        let target = TruthTable::new(rows).unwrap();
        let all: Vec<usize> = (0..net.edges.len()).collect();
        let fixed = random_assignment(&net, 0);
        let best = exhaustive_assignments(&net, &all, &target, &fixed).unwrap();
        let config = LearningConfig { restarts: 8, ..quick(checked) };
        let learned = learn(&net, &target, &config).unwrap();
        assert!(learned.error >= best.error);
        if best.error == 0 {
            assert_eq!(learned.error, 0, "exhaustive search found an exact selection");
        }
        checked += 1;
    }
}

#[test]
fn annealing_reaches_reference_table() {
    let net = build_reference_network();
    let config = LearningConfig { strategy: SearchStrategy::annealing(), ..LearningConfig::default() };
    let result = learn(&net, &TruthTable::reference(), &config).unwrap();
    assert_eq!(result.error, 0);
    assert!(result.warnings.is_empty());
}

#[test]
fn same_seed_same_result() {
    let net = build_reference_network();
    let a = learn(&net, &TruthTable::reference(), &quick(3)).unwrap();
    let b = learn(&net, &TruthTable::reference(), &quick(3)).unwrap();
    assert_eq!(a.assignment, b.assignment);
    assert_eq!(a.min_margin.to_bits(), b.min_margin.to_bits());
}

#[test]
fn unrealizable_target_is_flagged() {
    let bad = TruthTable::from_rows(["10", "00", "10", "11", "00", "10", "11", "11"]).unwrap();
    assert!(check_realizable(&bad).is_err());
    let result = learn(&build_reference_network(), &bad, &quick(1)).unwrap();
    assert!(result.error > 0);
    assert!(!result.warnings.is_empty());
}

#[test]
fn rejects_wrong_width() {
    let t = TruthTable::new(vec![vec![false]; 8]).unwrap();
    assert!(matches!(learn(&build_reference_network(), &t, &quick(0)), Err(LearningError::Width { .. })));
}
