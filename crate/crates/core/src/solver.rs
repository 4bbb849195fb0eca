//! Nodal analysis of the resistive fabric: DC operating point per input
//! pattern, exact-exponential RC transients with threshold detection, and
//! truth-table readout.
//!
//! Unknowns are the RC nodes plus, in floating mode, any logic-0 terminal.
//! Driven terminals are ideal sources and are folded into the injection
//! vector, so every system is symmetric with a non-positive off-diagonal.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::netlist::{
    validate, FabricNetwork, GroundingMode, InputPattern, NetlistError, TruthTable,
    WeightAssignment,
};

/// Relative residual bound for an accepted DC solve.
pub const RESIDUAL_REL_TOL: f64 = 1e-10;
/// Absolute residual bound (amps) used when the injection vector is zero.
pub const RESIDUAL_ABS_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("singular system: node(s) {} have no conductive path to a source or ground", .isolated.join(", "))]
    Isolated { isolated: Vec<String> },
    #[error("conductance matrix is singular or numerically indefinite")]
    Singular,
    #[error("DC residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("invalid transient parameters: {0}")]
    Parameters(String),
}

/// How an input terminal is driven for one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalDrive {
    Source(f64),
    Open,
}

/// Terminal drives implied by a logic pattern under the network's grounding mode.
pub fn pattern_drives(network: &FabricNetwork, pattern: InputPattern) -> Vec<TerminalDrive> {
    drives_for(network.supply_voltage, network.grounding_mode, pattern)
}

fn drives_for(supply: f64, mode: GroundingMode, pattern: InputPattern) -> Vec<TerminalDrive> {
    pattern
        .bits
        .iter()
        .map(|&bit| match (bit, mode) {
            (true, _) => TerminalDrive::Source(supply),
            (false, GroundingMode::GroundedZeros) => TerminalDrive::Source(0.0),
            (false, GroundingMode::FloatingZeros) => TerminalDrive::Open,
        })
        .collect()
}

#[derive(Debug, Clone)]
pub(crate) struct CircuitEdge {
    pub from: usize,
    pub to: usize,
    pub options: Vec<f64>,
    pub connected: bool,
}

/// Index-resolved form of a validated network.
#[derive(Debug, Clone)]
pub(crate) struct Circuit {
    pub ids: Vec<String>,
    pub leak: Vec<f64>,
    pub cap: Vec<f64>,
    pub terminals: Vec<usize>,
    pub outputs: Vec<usize>,
    pub measured: Vec<usize>,
    pub edges: Vec<CircuitEdge>,
    pub supply: f64,
    pub threshold: f64,
    pub mode: GroundingMode,
}

struct Stamped {
    unknowns: Vec<usize>,
    fixed: Vec<Option<f64>>,
    g: DMatrix<f64>,
    b: DVector<f64>,
}

impl Circuit {
    pub fn compile(network: &FabricNetwork) -> Result<Self, SolverError> {
        let violations = validate(network);
        if !violations.is_empty() {
            return Err(NetlistError::Invalid(violations).into());
        }
        let ids: Vec<String> = network.nodes.iter().map(|n| n.id.clone()).collect();
        let index = |id: &str| ids.iter().position(|x| x == id).expect("validated edge endpoint");
        let leak = network
            .nodes
            .iter()
            .map(|n| n.leak_resistance.map_or(0.0, |r| 1.0 / r))
            .collect();
        let cap = network.nodes.iter().map(|n| n.capacitance.unwrap_or(0.0)).collect();
        let terminals = (0..ids.len()).filter(|&i| network.nodes[i].is_input()).collect();
        let outputs = (0..ids.len())
            .filter(|&i| network.nodes[i].role == crate::netlist::NodeRole::Output)
            .collect();
        let measured = (0..ids.len())
            .filter(|&i| network.nodes[i].is_rc() && network.nodes[i].layer >= 2)
            .collect();
        let edges = network
            .edges
            .iter()
            .map(|e| CircuitEdge {
                from: index(&e.from),
                to: index(&e.to),
                options: e.options.values().to_vec(),
                connected: e.is_connected(),
            })
            .collect();
        Ok(Self {
            ids,
            leak,
            cap,
            terminals,
            outputs,
            measured,
            edges,
            supply: network.supply_voltage,
            threshold: network.threshold,
            mode: network.grounding_mode,
        })
    }

    pub fn drives(&self, pattern: InputPattern) -> Vec<TerminalDrive> {
        drives_for(self.supply, self.mode, pattern)
    }

    fn stamp(&self, drives: &[TerminalDrive], selected: &[usize]) -> Result<Stamped, SolverError> {
        let n = self.ids.len();
        let mut fixed = vec![None; n];
        for (&t, d) in self.terminals.iter().zip(drives) {
            if let TerminalDrive::Source(v) = *d {
                fixed[t] = Some(v);
            }
        }
        let unknowns: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
        let mut row = vec![usize::MAX; n];
        for (k, &i) in unknowns.iter().enumerate() {
            row[i] = k;
        }
        let m = unknowns.len();
        let mut g = DMatrix::zeros(m, m);
        let mut b = DVector::zeros(m);
        let mut anchored: Vec<bool> = unknowns.iter().map(|&i| self.leak[i] > 0.0).collect();
        let mut parent: Vec<usize> = (0..m).collect();

        for (k, &i) in unknowns.iter().enumerate() {
            g[(k, k)] += self.leak[i];
        }
        for (edge, &sel) in self.edges.iter().zip(selected) {
            if !edge.connected {
                continue;
            }
            let cond = 1.0 / edge.options[sel];
            match (fixed[edge.from], fixed[edge.to]) {
                (None, None) => {
                    let (p, q) = (row[edge.from], row[edge.to]);
                    g[(p, p)] += cond;
                    g[(q, q)] += cond;
                    g[(p, q)] -= cond;
                    g[(q, p)] -= cond;
                    let (rp, rq) = (find(&mut parent, p), find(&mut parent, q));
                    parent[rp] = rq;
                }
                (Some(v), None) | (None, Some(v)) => {
                    let node = if fixed[edge.from].is_none() { edge.from } else { edge.to };
                    let p = row[node];
                    g[(p, p)] += cond;
                    b[p] += cond * v;
                    anchored[p] = true;
                }
                (Some(_), Some(_)) => {}
            }
        }

        let mut root_anchored = vec![false; m];
        for k in 0..m {
            if anchored[k] {
                let r = find(&mut parent, k);
                root_anchored[r] = true;
            }
        }
        let isolated: Vec<String> = (0..m)
            .filter(|&k| {
                let r = find(&mut parent, k);
                !root_anchored[r]
            })
            .map(|k| self.ids[unknowns[k]].clone())
            .collect();
        if !isolated.is_empty() {
            return Err(SolverError::Isolated { isolated });
        }
        Ok(Stamped { unknowns, fixed, g, b })
    }

    pub fn assemble(
        &self,
        drives: &[TerminalDrive],
        selected: &[usize],
        pattern: Option<InputPattern>,
    ) -> Result<LinearSystem, SolverError> {
        let s = self.stamp(drives, selected)?;
        Ok(LinearSystem {
            node_ids: self.ids.clone(),
            unknowns: s.unknowns,
            fixed: s.fixed,
            conductance: s.g,
            injection: s.b,
            pattern,
            outputs: self.outputs.clone(),
            measured: self.measured.clone(),
            supply_voltage: self.supply,
            threshold: self.threshold,
        })
    }

    /// Full node voltages for all eight patterns, ordered 000..111.
    pub fn table_voltages(&self, selected: &[usize]) -> Result<Vec<Vec<f64>>, SolverError> {
        match self.mode {
            GroundingMode::GroundedZeros => {
                // Unknown set and matrix do not depend on the pattern here.
                let first = self.stamp(&self.drives(InputPattern::from_index(0)), selected)?;
                let lu = first.g.clone().lu();
                InputPattern::all()
                    .map(|p| {
                        let s = self.stamp(&self.drives(p), selected)?;
                        let x = lu.solve(&s.b).ok_or(SolverError::Singular)?;
                        check_residual(&s.g, &x, &s.b)?;
                        Ok(expand(&s.fixed, &s.unknowns, &x))
                    })
                    .collect()
            }
            GroundingMode::FloatingZeros => InputPattern::all()
                .map(|p| {
                    let s = self.stamp(&self.drives(p), selected)?;
                    let x = s.g.clone().lu().solve(&s.b).ok_or(SolverError::Singular)?;
                    check_residual(&s.g, &x, &s.b)?;
                    Ok(expand(&s.fixed, &s.unknowns, &x))
                })
                .collect(),
        }
    }
}

fn find(parent: &mut [usize], mut k: usize) -> usize {
    while parent[k] != k {
        parent[k] = parent[parent[k]];
        k = parent[k];
    }
    k
}

fn expand(fixed: &[Option<f64>], unknowns: &[usize], x: &DVector<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    for (k, &i) in unknowns.iter().enumerate() {
        v[i] = x[k];
    }
    v
}

fn residual_tolerance(b: &DVector<f64>) -> f64 {
    let scale = b.amax();
    if scale == 0.0 {
        RESIDUAL_ABS_TOL
    } else {
        RESIDUAL_REL_TOL * scale
    }
}

fn check_residual(g: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>) -> Result<f64, SolverError> {
    let residual = if x.is_empty() { 0.0 } else { (g * x - b).amax() };
    let tolerance = residual_tolerance(b);
    if !residual.is_finite() || residual > tolerance {
        return Err(SolverError::Residual { residual, tolerance });
    }
    Ok(residual)
}

/// Nodal equations `G·V = b` for one drive configuration.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub node_ids: Vec<String>,
    /// Node index of each unknown, in row order.
    pub unknowns: Vec<usize>,
    /// Per node: the imposed source voltage, if any.
    pub fixed: Vec<Option<f64>>,
    /// Siemens.
    pub conductance: DMatrix<f64>,
    /// Amps.
    pub injection: DVector<f64>,
    pub pattern: Option<InputPattern>,
    outputs: Vec<usize>,
    measured: Vec<usize>,
    pub supply_voltage: f64,
    pub threshold: f64,
}

impl LinearSystem {
    pub fn dimension(&self) -> usize {
        self.unknowns.len()
    }

    pub fn unknown_ids(&self) -> Vec<&str> {
        self.unknowns.iter().map(|&i| self.node_ids[i].as_str()).collect()
    }
}

pub fn assemble_dc_system(
    network: &FabricNetwork,
    pattern: InputPattern,
    assignment: &WeightAssignment,
) -> Result<LinearSystem, SolverError> {
    let circuit = Circuit::compile(network)?;
    assignment.check(network)?;
    circuit.assemble(&circuit.drives(pattern), &assignment.selected, Some(pattern))
}

/// Assembly with explicit terminal drives, e.g. analog sensor voltages.
pub fn assemble_with_drives(
    network: &FabricNetwork,
    drives: &[TerminalDrive],
    assignment: &WeightAssignment,
) -> Result<LinearSystem, SolverError> {
    let circuit = Circuit::compile(network)?;
    assignment.check(network)?;
    if drives.len() != circuit.terminals.len() {
        return Err(SolverError::Parameters(format!(
            "{} drives for {} terminals",
            drives.len(),
            circuit.terminals.len()
        )));
    }
    circuit.assemble(drives, &assignment.selected, None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeReading {
    pub node: String,
    pub voltage: f64,
    pub bit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputReading {
    pub node: String,
    pub voltage: f64,
    pub bit: bool,
    /// `voltage - threshold`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcSolution {
    pub node_ids: Vec<String>,
    pub voltages: Vec<f64>,
    /// Hidden-layer-2 and output nodes.
    pub measured: Vec<NodeReading>,
    pub outputs: Vec<OutputReading>,
    /// `max |G·V - b|`, amps.
    pub residual_norm: f64,
    /// Whether every voltage lies in `[0, supply]` (up to rounding).
    pub within_bounds: bool,
}

impl DcSolution {
    pub fn voltage(&self, id: &str) -> Option<f64> {
        self.node_ids.iter().position(|n| n == id).map(|i| self.voltages[i])
    }

    pub fn output_bits(&self) -> Vec<bool> {
        self.outputs.iter().map(|o| o.bit).collect()
    }

    pub fn margins(&self) -> Vec<f64> {
        self.outputs.iter().map(|o| o.margin).collect()
    }
}

/// Logic level for a node voltage; ties go to 1.
pub fn logic_level(voltage: f64, threshold: f64) -> bool {
    voltage >= threshold
}

pub fn solve_dc(system: &LinearSystem) -> Result<DcSolution, SolverError> {
    let x = if system.dimension() == 0 {
        DVector::zeros(0)
    } else {
        system
            .conductance
            .clone()
            .lu()
            .solve(&system.injection)
            .ok_or(SolverError::Singular)?
    };
    let residual_norm = check_residual(&system.conductance, &x, &system.injection)?;
    let voltages = expand(&system.fixed, &system.unknowns, &x);
    Ok(build_solution(system, voltages, residual_norm))
}

fn build_solution(system: &LinearSystem, voltages: Vec<f64>, residual_norm: f64) -> DcSolution {
    let th = system.threshold;
    let slack = 1e-9 * system.supply_voltage;
    let within_bounds = voltages
        .iter()
        .all(|&v| v >= -slack && v <= system.supply_voltage + slack);
    let measured = system
        .measured
        .iter()
        .map(|&i| NodeReading {
            node: system.node_ids[i].clone(),
            voltage: voltages[i],
            bit: logic_level(voltages[i], th),
        })
        .collect();
    let outputs = system
        .outputs
        .iter()
        .map(|&i| OutputReading {
            node: system.node_ids[i].clone(),
            voltage: voltages[i],
            bit: logic_level(voltages[i], th),
            margin: voltages[i] - th,
        })
        .collect();
    DcSolution {
        node_ids: system.node_ids.clone(),
        voltages,
        measured,
        outputs,
        residual_norm,
        within_bounds,
    }
}

/// Output logic bits of a solution against `threshold`.
pub fn readout(solution: &DcSolution, threshold: f64) -> Vec<bool> {
    solution
        .outputs
        .iter()
        .map(|o| logic_level(o.voltage, threshold))
        .collect()
}

/// Convenience: assemble and solve one pattern.
pub fn solve_pattern(
    network: &FabricNetwork,
    pattern: InputPattern,
    assignment: &WeightAssignment,
) -> Result<DcSolution, SolverError> {
    solve_dc(&assemble_dc_system(network, pattern, assignment)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct RowEvaluation {
    pub pattern: String,
    pub outputs: Vec<OutputReading>,
}

/// Realized table plus per-row output readings.
#[derive(Debug, Clone, Serialize)]
pub struct TableEvaluation {
    pub table: TruthTable,
    pub rows: Vec<RowEvaluation>,
    #[serde(skip)]
    pub solutions: Vec<DcSolution>,
}

impl TableEvaluation {
    pub fn margins(&self, pattern: InputPattern) -> Vec<f64> {
        self.rows[pattern.index()].outputs.iter().map(|o| o.margin).collect()
    }

    pub fn min_abs_margin(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.outputs.iter().map(|o| o.margin.abs()))
            .fold(f64::INFINITY, f64::min)
    }
}

/// DC solve and readout for all eight patterns.
pub fn evaluate_truth_table(
    network: &FabricNetwork,
    assignment: &WeightAssignment,
) -> Result<TableEvaluation, SolverError> {
    let circuit = Circuit::compile(network)?;
    assignment.check(network)?;
    let mut solutions = Vec::with_capacity(8);
    for pattern in InputPattern::all() {
        let system = circuit.assemble(&circuit.drives(pattern), &assignment.selected, Some(pattern))?;
        solutions.push(solve_dc(&system)?);
    }
    let rows: Vec<RowEvaluation> = solutions
        .iter()
        .zip(InputPattern::all())
        .map(|(s, p)| RowEvaluation {
            pattern: p.to_string(),
            outputs: s.outputs.clone(),
        })
        .collect();
    let table = TruthTable::new(solutions.iter().map(DcSolution::output_bits).collect())?;
    Ok(TableEvaluation { table, rows, solutions })
}

#[derive(Debug, Clone, Default)]
pub struct TransientOptions {
    /// Per-node initial voltages; RC nodes start from these instead of 0 V.
    pub initial_voltages: Option<Vec<f64>>,
    /// Discharge an output node to 0 V whenever it crosses threshold.
    pub reset_on_crossing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub node: String,
    /// First upward threshold crossing, seconds.
    pub first: Option<f64>,
    /// Every upward crossing; more than one only with reset enabled.
    pub spikes: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransientTrace {
    pub node_ids: Vec<String>,
    pub times: Vec<f64>,
    /// `voltages[k][i]`: node i at `times[k]`.
    pub voltages: Vec<Vec<f64>>,
    pub crossings: Vec<Crossing>,
    /// Slowest mode of the RC network, seconds.
    pub max_time_constant: f64,
    /// DC limit of the trace.
    pub steady_state: Vec<f64>,
}

impl TransientTrace {
    pub fn final_voltages(&self) -> &[f64] {
        self.voltages.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn crossing(&self, node: &str) -> Option<f64> {
        self.crossings.iter().find(|c| c.node == node).and_then(|c| c.first)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("time");
        for id in &self.node_ids {
            out.push(',');
            out.push_str(id);
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.voltages) {
            out.push_str(&format!("{t:e}"));
            for v in row {
                out.push_str(&format!(",{v:.12}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn solve_transient(
    network: &FabricNetwork,
    pattern: InputPattern,
    assignment: &WeightAssignment,
    t_end: f64,
    dt: f64,
) -> Result<TransientTrace, SolverError> {
    let drives = pattern_drives(network, pattern);
    solve_transient_with(network, &drives, assignment, t_end, dt, &TransientOptions::default())
}

/// Exact-exponential integration of `C dV/dt = -(G V - b)`.
///
/// Open terminals carry no capacitance and are eliminated by Kron reduction,
/// leaving a symmetric-similar system over the capacitive nodes whose
/// propagator is built from one symmetric eigendecomposition.
pub fn solve_transient_with(
    network: &FabricNetwork,
    drives: &[TerminalDrive],
    assignment: &WeightAssignment,
    t_end: f64,
    dt: f64,
    options: &TransientOptions,
) -> Result<TransientTrace, SolverError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SolverError::Parameters(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= dt && t_end.is_finite()) {
        return Err(SolverError::Parameters(format!("t_end {t_end} must be at least dt {dt}")));
    }
    let circuit = Circuit::compile(network)?;
    assignment.check(network)?;
    let s = circuit.stamp(drives, &assignment.selected)?;
    let n_nodes = circuit.ids.len();
    if let Some(init) = &options.initial_voltages {
        if init.len() != n_nodes {
            return Err(SolverError::Parameters(format!(
                "{} initial voltages for {n_nodes} nodes",
                init.len()
            )));
        }
    }

    let dyn_rows: Vec<usize> = (0..s.unknowns.len()).filter(|&k| circuit.cap[s.unknowns[k]] > 0.0).collect();
    let alg_rows: Vec<usize> = (0..s.unknowns.len()).filter(|&k| circuit.cap[s.unknowns[k]] == 0.0).collect();
    let nd = dyn_rows.len();
    let na = alg_rows.len();
    let sub = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| s.g[(rows[i], cols[j])]);
    let g_dd = sub(&dyn_rows, &dyn_rows);
    let b_d = DVector::from_fn(nd, |i, _| s.b[dyn_rows[i]]);

    // Algebraic nodes: V_a = alg_offset - alg_gain * V_d.
    let (g_red, b_red, alg_gain, alg_offset) = if na == 0 {
        (g_dd, b_d, DMatrix::zeros(0, nd), DVector::zeros(0))
    } else {
        let g_aa = sub(&alg_rows, &alg_rows);
        let g_ad = sub(&alg_rows, &dyn_rows);
        let g_da = sub(&dyn_rows, &alg_rows);
        let b_a = DVector::from_fn(na, |i, _| s.b[alg_rows[i]]);
        let lu = g_aa.lu();
        let gain = lu.solve(&g_ad).ok_or(SolverError::Singular)?;
        let offset = lu.solve(&b_a).ok_or(SolverError::Singular)?;
        (&g_dd - &g_da * &gain, &b_d - &g_da * &offset, gain, offset)
    };

    let v_inf = g_red.clone().lu().solve(&b_red).ok_or(SolverError::Singular)?;
    let sqrt_c = DVector::from_fn(nd, |i, _| circuit.cap[s.unknowns[dyn_rows[i]]].sqrt());
    let scaled = DMatrix::from_fn(nd, nd, |i, j| g_red[(i, j)] / (sqrt_c[i] * sqrt_c[j]));
    let eig = scaled.symmetric_eigen();
    let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if nd > 0 && !(lambda_min > 0.0) {
        return Err(SolverError::Singular);
    }
    let decay = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (-l * dt).exp()));
    let q = &eig.eigenvectors;
    let core = q * decay * q.transpose();
    let propagator = DMatrix::from_fn(nd, nd, |i, j| core[(i, j)] * sqrt_c[j] / sqrt_c[i]);

    let full = |vd: &DVector<f64>| {
        let mut v: Vec<f64> = s.fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
        for (k, &r) in dyn_rows.iter().enumerate() {
            v[s.unknowns[r]] = vd[k];
        }
        if na > 0 {
            let va = &alg_offset - &alg_gain * vd;
            for (k, &r) in alg_rows.iter().enumerate() {
                v[s.unknowns[r]] = va[k];
            }
        }
        v
    };

    let mut vd = DVector::from_fn(nd, |i, _| {
        options
            .initial_voltages
            .as_ref()
            .map_or(0.0, |init| init[s.unknowns[dyn_rows[i]]])
    });
    let out_rows: Vec<Option<usize>> = circuit
        .outputs
        .iter()
        .map(|&o| dyn_rows.iter().position(|&r| s.unknowns[r] == o))
        .collect();
    let th = circuit.threshold;
    let mut crossings: Vec<Crossing> = circuit
        .outputs
        .iter()
        .map(|&o| Crossing {
            node: circuit.ids[o].clone(),
            first: None,
            spikes: Vec::new(),
        })
        .collect();

    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut voltages = Vec::with_capacity(steps + 1);
    times.push(0.0);
    voltages.push(full(&vd));
    for k in 1..=steps {
        let prev = vd.clone();
        vd = &v_inf + &propagator * (&vd - &v_inf);
        let t0 = (k - 1) as f64 * dt;
        for (c, row) in crossings.iter_mut().zip(&out_rows) {
            let Some(r) = *row else { continue };
            let (a, b) = (prev[r], vd[r]);
            if a < th && b >= th {
                let t = t0 + dt * (th - a) / (b - a);
                c.first.get_or_insert(t);
                c.spikes.push(t);
                if options.reset_on_crossing {
                    vd[r] = 0.0;
                }
            }
        }
        times.push(k as f64 * dt);
        voltages.push(full(&vd));
    }

    Ok(TransientTrace {
        node_ids: circuit.ids.clone(),
        times,
        voltages,
        crossings,
        max_time_constant: if nd > 0 { 1.0 / lambda_min } else { 0.0 },
        steady_state: full(&v_inf),
    })
}
