//! Cross-checks for the direct solver and the learner.
//!
//! `relax_solve` works node by node on the netlist itself with Gauss-Seidel
//! sweeps and never builds a matrix. `exhaustive_assignments` enumerates
//! every option combination over a subset of edges.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::learning::{score_voltages, Score};
use crate::netlist::{
    FabricNetwork, GroundingMode, InputPattern, NetlistError, TruthTable, WeightAssignment,
};
use crate::solver::{Circuit, SolverError};

/// Largest search space `exhaustive_assignments` will enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("relaxation did not converge in {} sweeps (last update {:e} V)", .0.iterations, .0.max_update)]
    NotConverged(Box<RelaxationReport>),
    #[error("search space of {0} assignments exceeds the limit of {EXHAUSTIVE_LIMIT}")]
    SearchSpace(u64),
    #[error("edge index {0} out of range")]
    EdgeIndex(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationReport {
    pub node_ids: Vec<String>,
    pub voltages: Vec<f64>,
    pub iterations: usize,
    pub max_update: f64,
}

impl RelaxationReport {
    pub fn voltage(&self, id: &str) -> Option<f64> {
        self.node_ids.iter().position(|n| n == id).map(|i| self.voltages[i])
    }
}

/// Gauss-Seidel relaxation of the nodal equations, sweeping in netlist order.
pub fn relax_solve(
    network: &FabricNetwork,
    pattern: InputPattern,
    assignment: &WeightAssignment,
    tol: f64,
    max_iters: usize,
) -> Result<RelaxationReport, OracleError> {
    if !(tol > 0.0) {
        return Err(OracleError::Tolerance(tol));
    }
    assignment.check(network)?;
    let index: HashMap<&str, usize> = network
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();

    // Neighbour lists of (node, conductance) over connected edges.
    let mut neighbours: Vec<Vec<(usize, f64)>> = vec![Vec::new(); network.nodes.len()];
    for (edge, &sel) in network.edges.iter().zip(&assignment.selected) {
        if !edge.is_connected() {
            continue;
        }
        let (Some(&a), Some(&b)) = (index.get(edge.from.as_str()), index.get(edge.to.as_str())) else {
            return Err(NetlistError::Assignment(format!("edge {} has unknown endpoint", edge.id())).into());
        };
        let g = 1.0 / edge.options.values()[sel];
        neighbours[a].push((b, g));
        neighbours[b].push((a, g));
    }

    let mut voltage = vec![0.0; network.nodes.len()];
    let mut free = vec![false; network.nodes.len()];
    let mut terminal = 0;
    for (i, node) in network.nodes.iter().enumerate() {
        if node.is_input() {
            let bit = pattern.bits[terminal];
            terminal += 1;
            if bit {
                voltage[i] = network.supply_voltage;
            } else if network.grounding_mode == GroundingMode::FloatingZeros {
                free[i] = true;
            }
        } else {
            free[i] = true;
        }
    }
    let leak: Vec<f64> = network
        .nodes
        .iter()
        .map(|n| n.leak_resistance.map_or(0.0, |r| 1.0 / r))
        .collect();

    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut max_update: f64 = 0.0;
        for i in 0..voltage.len() {
            if !free[i] {
                continue;
            }
            let (mut num, mut den) = (0.0, leak[i]);
            for &(j, g) in &neighbours[i] {
                num += g * voltage[j];
                den += g;
            }
            if den == 0.0 {
                continue;
            }
            let next = num / den;
            max_update = max_update.max((next - voltage[i]).abs());
            voltage[i] = next;
        }
        if max_update < tol || iterations >= max_iters {
            let report = RelaxationReport {
                node_ids: network.nodes.iter().map(|n| n.id.clone()).collect(),
                voltages: voltage,
                iterations,
                max_update,
            };
            return if max_update < tol {
                Ok(report)
            } else {
                Err(OracleError::NotConverged(Box::new(report)))
            };
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExhaustiveResult {
    pub assignment: WeightAssignment,
    pub error: u32,
    /// Smallest target-oriented margin over all rows and outputs, volts.
    pub min_margin: f64,
    pub evaluated: u64,
}

/// Enumerates every option combination over `edge_subset`, other edges held
/// at `fixed`. Best = lowest error, then largest min margin, then the
/// lexicographically smallest selection vector.
pub fn exhaustive_assignments(
    network: &FabricNetwork,
    edge_subset: &[usize],
    target: &TruthTable,
    fixed: &WeightAssignment,
) -> Result<ExhaustiveResult, OracleError> {
    fixed.check(network)?;
    let circuit = Circuit::compile(network)?;
    let radices: Vec<usize> = edge_subset
        .iter()
        .map(|&e| {
            network
                .edges
                .get(e)
                .map(|edge| edge.options.len())
                .ok_or(OracleError::EdgeIndex(e))
        })
        .collect::<Result<_, _>>()?;
    let space = radices
        .iter()
        .try_fold(1u64, |acc, &r| acc.checked_mul(r as u64))
        .unwrap_or(u64::MAX);
    if space > EXHAUSTIVE_LIMIT {
        return Err(OracleError::SearchSpace(space));
    }

    let mut current = fixed.clone();
    for &e in edge_subset {
        current.selected[e] = 0;
    }
    let mut digits = vec![0usize; edge_subset.len()];
    let mut best: Option<(Score, WeightAssignment)> = None;
    let mut evaluated = 0;
    loop {
        let volts = circuit.table_voltages(&current.selected)?;
        let score = score_voltages(&circuit, &volts, target);
        evaluated += 1;
        let better = match &best {
            None => true,
            Some((s, a)) => score.better_than(s) || (score == *s && current < *a),
        };
        if better {
            best = Some((score, current.clone()));
        }
        // Odometer increment over the subset.
        let mut k = 0;
        loop {
            if k == digits.len() {
                let (score, assignment) = best.expect("at least one candidate");
                return Ok(ExhaustiveResult {
                    assignment,
                    error: score.error,
                    min_margin: score.min_margin,
                    evaluated,
                });
            }
            digits[k] += 1;
            if digits[k] < radices[k] {
                current.selected[edge_subset[k]] = digits[k];
                break;
            }
            digits[k] = 0;
            current.selected[edge_subset[k]] = 0;
            k += 1;
        }
    }
}
