mod common;

use common::{single_node_network, SINGLE_CAP, SINGLE_EDGE, SINGLE_LEAK};
use fabric_snn::netlist::{build_reference_network, InputPattern, WeightAssignment};
use fabric_snn::reference::reference_assignment;
use fabric_snn::solver::{
    pattern_drives, solve_pattern, solve_transient, solve_transient_with, TransientOptions,
};

fn a_only() -> WeightAssignment {
    WeightAssignment { selected: vec![0] }
}

fn analytic() -> (f64, f64) {
    let parallel = SINGLE_EDGE * SINGLE_LEAK / (SINGLE_EDGE + SINGLE_LEAK);
    (SINGLE_CAP * parallel, 5.0 * SINGLE_LEAK / (SINGLE_EDGE + SINGLE_LEAK))
}

#[test]
fn single_node_matches_closed_form() {
    let net = single_node_network();
    let a = a_only();
    let p = InputPattern::from_index(0b100);
    let (tau, v_inf) = analytic();
    assert!((tau - 714.1e-6).abs() < 0.1e-6, "tau {tau}");
    let trace = solve_transient(&net, p, &a, 10.0 * tau, tau / 100.0).unwrap();
    let x = trace.node_ids.iter().position(|n| n == "X").unwrap();
    for (t, v) in trace.times.iter().zip(&trace.voltages) {
        let expected = v_inf * (1.0 - (-t / tau).exp());
        assert!((v[x] - expected).abs() <= 1e-3 * expected + 1e-12, "t={t}: {} vs {expected}", v[x]);
    }
    let t_star = -tau * (1.0 - 2.3 / v_inf).ln();
    assert!((t_star - 509.7e-6).abs() < 0.1e-6, "t* {t_star}");
    let crossing = trace.crossing("X").unwrap();
    assert!((crossing - t_star).abs() <= 5e-3 * t_star, "{crossing} vs {t_star}");
    assert!((trace.max_time_constant - tau).abs() <= 1e-9 * tau);
}

#[test]
fn settles_to_dc() {
    let net = single_node_network();
    let p = InputPattern::from_index(0b100);
    let trace = solve_transient(&net, p, &a_only(), 20e-3, 1e-4).unwrap();
    let dc = solve_pattern(&net, p, &a_only()).unwrap();
    let x = trace.node_ids.iter().position(|n| n == "X").unwrap();
    assert!((trace.final_voltages()[x] - dc.voltage("X").unwrap()).abs() < 1e-6);
}

#[test]
fn reference_settles_to_dc() {
    let net = build_reference_network();
    let a = reference_assignment();
    for p in InputPattern::all() {
        let trace = solve_transient(&net, p, &a, 400e-3, 1e-3).unwrap();
        let dc = solve_pattern(&net, p, &a).unwrap();
        for (id, v) in trace.node_ids.iter().zip(trace.final_voltages()) {
            assert!((v - dc.voltage(id).unwrap()).abs() < 1e-4, "{p} {id}");
        }
        for (id, v) in trace.node_ids.iter().zip(&trace.steady_state) {
            assert!((v - dc.voltage(id).unwrap()).abs() < 1e-9, "{p} {id}");
        }
    }
}

#[test]
fn reset_produces_repeated_spikes() {
    let net = single_node_network();
    let p = InputPattern::from_index(0b100);
    let drives = pattern_drives(&net, p);
    let options = TransientOptions { reset_on_crossing: true, ..TransientOptions::default() };
    let trace = solve_transient_with(&net, &drives, &a_only(), 10e-3, 5e-6, &options).unwrap();
    let spikes = &trace.crossings.iter().find(|c| c.node == "X").unwrap().spikes;
    assert!(spikes.len() > 3);
    assert!(spikes.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn starts_from_given_state() {
    let net = single_node_network();
    let drives = pattern_drives(&net, InputPattern::from_index(0));
    let options = TransientOptions { initial_voltages: Some(vec![0.0, 0.0, 0.0, 4.0]), ..TransientOptions::default() };
    let trace = solve_transient_with(&net, &drives, &a_only(), 1e-3, 1e-5, &options).unwrap();
    let x = trace.node_ids.iter().position(|n| n == "X").unwrap();
    assert!((trace.voltages[0][x] - 4.0).abs() < 1e-12);
    assert!(trace.voltages.windows(2).all(|w| w[1][x] <= w[0][x]));
}

#[test]
fn rejects_bad_step() {
    let net = single_node_network();
    assert!(solve_transient(&net, InputPattern::from_index(1), &a_only(), 1e-3, 0.0).is_err());
    assert!(solve_transient(&net, InputPattern::from_index(1), &a_only(), 1e-3, f64::NAN).is_err());
}
