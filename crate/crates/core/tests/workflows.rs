use fabric_snn::faults::{default_campaign, zone_campaign, Campaign, FaultKind};
use fabric_snn::netlist::{build_reference_network, InputPattern, TruthTable};
use fabric_snn::perturbation::{monte_carlo, scenario_sweep, Execution, PerturbationSpec};
use fabric_snn::reference::{reference_assignment, reference_target, wearability_scenarios};
use fabric_snn::sensors::{
    event_log, parse_scenarios, run_scenarios, touch_scenarios, InputMode, PressureSensorModel, TriggerBinding,
};
use fabric_snn::solver::evaluate_truth_table;

#[test]
fn default_campaign_covers_rows_and_patches() {
    let net = build_reference_network();
    let a = reference_assignment();
    let campaign = default_campaign(&net, &a).unwrap();
    assert_eq!(Campaign::parse(&campaign.to_json()).unwrap(), campaign);
    let report = zone_campaign(&net, &a, &campaign, &reference_target()).unwrap();
    let labels: Vec<&str> = report.outcomes().map(|(_, f)| f.label.as_str()).collect();
    assert_eq!(
        labels,
        ["N5 Row1", "N5 Row4", "N5 Row1+Row4", "N8 Row1", "N8 Row4", "N8 Row1+Row4", "Patch N5", "Patch N8"]
    );
    assert_eq!(report.summary.len(), 8);
    assert!(report
        .summary
        .windows(2)
        .all(|w| (w[0].flipped_rows, w[0].max_abs_delta_percent) >= (w[1].flipped_rows, w[1].max_abs_delta_percent)));
    for (_, f) in report.outcomes() {
        assert!(f.error.is_none());
        assert_eq!(f.entries.len(), 8 * net.rc_node_count());
        if f.kind == FaultKind::PatchDisconnect {
            assert_eq!(f.opened_edges.len(), 4);
        }
    }
    let csv = report.to_csv();
    assert_eq!(csv.lines().count(), 1 + 8 * 8 * net.rc_node_count());
}

#[test]
fn row_fault_moves_its_patch() {
    let net = build_reference_network();
    let a = reference_assignment();
    let campaign = default_campaign(&net, &a).unwrap();
    let report = zone_campaign(&net, &a, &campaign, &reference_target()).unwrap();
    let (_, n5) = report.outcomes().find(|(_, f)| f.label == "N5 Row1").unwrap();
    let at_n5: Vec<_> = n5.entries.iter().filter(|e| e.node == "N5" && e.pattern != "000").collect();
    assert_eq!(at_n5.len(), 7);
    assert!(at_n5.iter().all(|e| e.faulted != e.baseline));
    assert!(n5.entries.iter().filter(|e| e.pattern == "000").all(|e| e.delta == 0.0 && e.absolute));
}

#[test]
fn wider_jitter_widens_every_spread() {
    let net = build_reference_network();
    let a = reference_assignment();
    let sweep = scenario_sweep(&net, &a, &wearability_scenarios(500, 5), Execution::Parallel).unwrap();
    assert_eq!(sweep.scenarios.len(), 3);
    let cells = sweep.scenarios[0].cells.len();
    for k in 0..cells {
        let spreads: Vec<f64> = (0..3).map(|s| sweep.deltas[s * cells + k].spread).collect();
        assert!(spreads.windows(2).all(|w| w[0] <= w[1] + 1e-12), "{spreads:?}");
    }
    assert!(sweep.deltas[..cells].iter().all(|d| d.delta_mean == 0.0));
}

#[test]
fn zero_jitter_reproduces_nominal() {
    let net = build_reference_network();
    let a = reference_assignment();
    let report = monte_carlo(&net, &a, &PerturbationSpec::zero(20, 1), Execution::Serial).unwrap();
    let eval = evaluate_truth_table(&net, &a).unwrap();
    for c in &report.cells {
        assert_eq!(c.v_min, c.nominal);
        assert_eq!(c.v_max, c.nominal);
        assert_eq!(c.flip_rate, 0.0);
    }
    assert_eq!(report.cells.len(), 16);
    assert!(report.within_bounds);
    assert_eq!(report.failed_samples, 0);
    assert!(eval.min_abs_margin() > 0.0);
}

#[test]
fn touch_scenarios_reproduce_the_table() {
    let net = build_reference_network();
    let a = reference_assignment();
    let scenarios = touch_scenarios();
    assert_eq!(parse_scenarios(&serde_json::to_string(&scenarios).unwrap()).unwrap(), scenarios);
    let (results, events) = run_scenarios(
        &net,
        &a,
        &PressureSensorModel::default(),
        &scenarios,
        InputMode::Logic,
        &TriggerBinding::default(),
    )
    .unwrap();
    let target = TruthTable::reference();
    for (i, r) in results.iter().enumerate() {
        let p = InputPattern::from_index(i);
        assert_eq!(r.pattern, p.to_string());
        assert_eq!(r.outputs, target.row_string(p));
    }
    assert_eq!(events.len(), 1);
    assert_eq!(events[0].pattern, "111");
    assert!(events[0].output_voltage >= 2.3);
    assert_eq!(event_log(&events).lines().count(), 1);
}

#[test]
fn full_press_analog_stays_below_logic() {
    let net = build_reference_network();
    let a = reference_assignment();
    let model = PressureSensorModel::default();
    let binding = TriggerBinding::default();
    let scenarios = touch_scenarios();
    let (logic, _) = run_scenarios(&net, &a, &model, &scenarios, InputMode::Logic, &binding).unwrap();
    let (analog, _) = run_scenarios(&net, &a, &model, &scenarios, InputMode::Analog, &binding).unwrap();
    assert!(analog[0].solution.outputs.iter().all(|o| o.voltage > 0.0));
    let (l, r) = (&logic[7], &analog[7]);
    assert!(r.sensor_voltages.iter().all(|&v| v < 5.0));
    for (x, y) in l.solution.outputs.iter().zip(&r.solution.outputs) {
        assert!(y.voltage < x.voltage);
    }
}
