use fabric_snn::faults::{apply_fault, fault_report, FaultSpec};
use fabric_snn::netlist::{
    build_reference_network, parse_network, serialize_network, EdgeState, FabricNetwork, GroundingMode,
    InputPattern, TruthTable, WeightAssignment,
};
use fabric_snn::oracle::relax_solve;
use fabric_snn::perturbation::{monte_carlo, sample_network, Distribution, Execution, OhmRange, PerturbationSpec};
use fabric_snn::sensors::{pressures_to_pattern, sensor_voltage, PressureSensorModel};
use fabric_snn::solver::{evaluate_truth_table, logic_level, solve_pattern};
use fabric_snn::synth::random_network;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn net_from(seed: u64, max_nodes: usize, mode: GroundingMode) -> (FabricNetwork, WeightAssignment) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (net, a) = random_network(&mut rng, max_nodes, mode);
    (net.with_assignment(&a).unwrap(), a)
}

fn reference_assignment_from(seed: u64) -> WeightAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    use rand::Rng;
    WeightAssignment {
        selected: (0..36).map(|_| rng.gen_range(0..3)).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn network_json_round_trips(seed in any::<u64>()) {
        let (net, _) = net_from(seed, 12, GroundingMode::FloatingZeros);
        prop_assert_eq!(parse_network(&serialize_network(&net)).unwrap(), net);
    }

    #[test]
    fn assignment_json_round_trips(seed in any::<u64>()) {
        let net = build_reference_network();
        let a = reference_assignment_from(seed);
        prop_assert_eq!(WeightAssignment::parse(&net, &a.to_json(&net)).unwrap(), a);
    }

    #[test]
    fn truth_table_json_round_trips(bits in proptest::collection::vec(any::<bool>(), 16)) {
        let t = TruthTable::new(bits.chunks(2).map(|c| c.to_vec()).collect()).unwrap();
        prop_assert_eq!(TruthTable::parse(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn grounded_superposition(seed in any::<u64>()) {
        let (net, a) = net_from(seed, 12, GroundingMode::GroundedZeros);
        let units: Vec<Vec<f64>> = (0..3)
            .map(|i| solve_pattern(&net, InputPattern::unit(i), &a).unwrap().voltages)
            .collect();
        for p in InputPattern::all() {
            let v = solve_pattern(&net, p, &a).unwrap().voltages;
            for (k, &vk) in v.iter().enumerate() {
                let sum: f64 = (0..3).filter(|&i| p.bits[i]).map(|i| units[i][k]).sum();
                prop_assert!((vk - sum).abs() <= 1e-9, "{p} node {k}: {vk} vs {sum}");
            }
        }
    }

    #[test]
    fn voltages_monotone_in_inputs(seed in any::<u64>(), floating in any::<bool>()) {
        let mode = if floating { GroundingMode::FloatingZeros } else { GroundingMode::GroundedZeros };
        let (net, a) = net_from(seed, 12, mode);
        let volts: Vec<Vec<f64>> = InputPattern::all().map(|p| solve_pattern(&net, p, &a).unwrap().voltages).collect();
        for p in InputPattern::all() {
            for q in InputPattern::all().filter(|q| p.is_subset_of(q)) {
                for (x, y) in volts[p.index()].iter().zip(&volts[q.index()]) {
                    prop_assert!(*x <= y + 1e-9, "{p} <= {q}: {x} > {y}");
                }
            }
        }
    }

    #[test]
    fn voltages_stay_within_supply(seed in any::<u64>(), floating in any::<bool>()) {
        let mode = if floating { GroundingMode::FloatingZeros } else { GroundingMode::GroundedZeros };
        let (net, a) = net_from(seed, 12, mode);
        for p in InputPattern::all() {
            let s = solve_pattern(&net, p, &a).unwrap();
            prop_assert!(s.within_bounds);
            prop_assert!(s.voltages.iter().all(|&v| v >= -1e-9 && v <= net.supply_voltage + 1e-9));
        }
    }

    #[test]
    fn grounding_dominance(seed in any::<u64>()) {
        let (grounded, a) = net_from(seed, 8, GroundingMode::GroundedZeros);
        let mut floating = grounded.clone();
        floating.grounding_mode = GroundingMode::FloatingZeros;
        for p in InputPattern::all() {
            let g = solve_pattern(&grounded, p, &a).unwrap();
            let f = solve_pattern(&floating, p, &a).unwrap();
            for (x, y) in g.voltages.iter().zip(&f.voltages) {
                prop_assert!(*x <= y + 1e-9);
            }
        }
    }

    #[test]
    fn faulted_voltages_match_fresh_relaxation(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (net, a) = net_from(seed, 8, GroundingMode::GroundedZeros);
        let e = pick.index(net.edges.len());
        let spec = FaultSpec::edges("cut", &[&net.edges[e].id()]);
        let faulted = apply_fault(&net, &spec).unwrap();
        let base_table = evaluate_truth_table(&net, &a).unwrap().table;
        let report = match fault_report(&net, &a, std::slice::from_ref(&spec), &base_table) {
            Ok(r) => r,
            Err(err) => return Err(TestCaseError::fail(err.to_string())),
        };
        let outcome = &report.faults[0];
        if let Some(err) = &outcome.error {
            return Err(TestCaseError::fail(err.clone()));
        }
        for p in InputPattern::all() {
            let fresh = relax_solve(&faulted, p, &a, 1e-14, 2_000_000).unwrap();
            for entry in outcome.entries.iter().filter(|x| x.pattern == p.to_string()) {
                let v = fresh.voltage(&entry.node).unwrap();
                prop_assert!((entry.faulted - v).abs() <= 1e-9, "{} {}: {} vs {}", p, entry.node, entry.faulted, v);
            }
        }
    }

    #[test]
    fn flips_follow_margins(seed in any::<u64>(), node in 0usize..4) {
        let net = build_reference_network();
        let a = reference_assignment_from(seed);
        let patch = ["N5", "N6", "N7", "N8"][node];
        let target = evaluate_truth_table(&net, &a).unwrap().table;
        let report = fault_report(&net, &a, &[FaultSpec::patch("p", patch)], &target).unwrap();
        let th = net.threshold;
        for o in &report.faults[0].outputs {
            let before = logic_level(th + o.baseline_margin, th);
            let after = logic_level(th + o.baseline_margin + o.shift, th);
            prop_assert_eq!(o.flipped, before != after);
            if o.flipped {
                prop_assert!(o.baseline_margin.abs() <= o.shift.abs());
            }
        }
        let flipped: Vec<String> = InputPattern::all()
            .filter(|p| report.faults[0].outputs.iter().any(|o| o.flipped && o.pattern == p.to_string()))
            .map(|p| p.to_string())
            .collect();
        prop_assert_eq!(&report.faults[0].flipped_rows, &flipped);
    }

    #[test]
    fn cutting_a_source_edge_never_raises_its_current(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (net, a) = net_from(seed, 6, GroundingMode::GroundedZeros);
        let p = InputPattern::new(true, true, true);
        let source_edges: Vec<usize> = (0..net.edges.len()).filter(|&i| net.edges[i].from == "A").collect();
        prop_assume!(!source_edges.is_empty());
        let cut = source_edges[pick.index(source_edges.len())];
        let current = |n: &FabricNetwork| {
            let v = relax_solve(n, p, &a, 1e-14, 2_000_000).unwrap();
            n.edges
                .iter()
                .filter(|e| e.from == "A" && e.state == EdgeState::Connected)
                .map(|e| (v.voltage("A").unwrap() - v.voltage(&e.to).unwrap()) / e.selected_resistance().unwrap())
                .sum::<f64>()
        };
        let mut faulted = net.clone();
        faulted.edges[cut].state = EdgeState::Disconnected;
        prop_assert!(current(&faulted) <= current(&net) * (1.0 + 1e-9) + 1e-15);
    }

    #[test]
    fn jittered_values_stay_in_bounds(
        seed in any::<u64>(),
        sample in any::<u64>(),
        tol in 0.0f64..0.2,
        thread in 0.0f64..50.0,
        gaussian in any::<bool>(),
    ) {
        let net = build_reference_network().with_assignment(&reference_assignment_from(seed)).unwrap();
        let spec = PerturbationSpec {
            resistor_tolerance: tol,
            thread_resistance: OhmRange { min: 0.0, max: thread },
            contact_resistance: OhmRange { min: 1.0, max: 2.0 },
            distribution: if gaussian { Distribution::Gaussian } else { Distribution::Uniform },
            ..PerturbationSpec::new(1, seed)
        };
        let jittered = sample_network(&net, &spec, sample).unwrap();
        for (j, n) in jittered.edges.iter().zip(&net.edges) {
            let r = n.selected_resistance().unwrap();
            let v = j.selected_resistance().unwrap();
            prop_assert!(v >= r * (1.0 - tol) + 1.0 - 1e-9);
            prop_assert!(v <= r * (1.0 + tol) + thread + 2.0 + 1e-9);
        }
    }

    #[test]
    fn sensor_voltage_increases_with_pressure(p in 0.0f64..5.0, dp in 1e-6f64..1.0) {
        let m = PressureSensorModel::default();
        let lo = sensor_voltage(&m, p).unwrap();
        let hi = sensor_voltage(&m, p + dp).unwrap();
        prop_assert!(lo < hi);
        prop_assert!(lo > 5.0 / 11.0 - 1e-12 && hi < 5.0 / 1.5);
    }

    #[test]
    fn pressing_harder_never_clears_a_bit(p in prop::array::uniform3(0.0f64..4.0), extra in prop::array::uniform3(0.0f64..4.0)) {
        let m = PressureSensorModel::default();
        let before = pressures_to_pattern(&m, p).unwrap();
        let after = pressures_to_pattern(&m, [p[0] + extra[0], p[1] + extra[1], p[2] + extra[2]]).unwrap();
        prop_assert!(before.is_subset_of(&after));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn monte_carlo_is_deterministic_across_execution(seed in any::<u64>()) {
        let net = build_reference_network();
        let a = reference_assignment_from(seed);
        let spec = PerturbationSpec::new(64, seed);
        let serial = monte_carlo(&net, &a, &spec, Execution::Serial).unwrap();
        let parallel = monte_carlo(&net, &a, &spec, Execution::Parallel).unwrap();
        prop_assert_eq!(&serial, &parallel);
        prop_assert!(serial.cells.iter().all(|c| c.v_min <= c.mean && c.mean <= c.v_max));
        prop_assert!(serial.cells.iter().all(|c| (0.0..=1.0).contains(&c.flip_rate)));
    }
}
