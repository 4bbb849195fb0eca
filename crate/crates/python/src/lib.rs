//! Python bindings. Structured reports cross the boundary as JSON strings.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use snn::faults::{default_campaign, zone_campaign, Campaign};
use snn::learning::{check_realizable, learn as learn_table, LearningConfig, SearchStrategy};
use snn::netlist::{build_reference_network, parse_network, FabricNetwork, InputPattern, TruthTable, WeightAssignment};
use snn::oracle::relax_solve;
use snn::perturbation::{monte_carlo as run_mc, Execution, PerturbationSpec};
use snn::reference::reference_assignment;
use snn::sensors::{sensor_voltage as divider_voltage, PressureSensorModel};
use snn::solver::{evaluate_truth_table, solve_pattern, solve_transient};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn pattern(bits: &str) -> PyResult<InputPattern> {
    bits.parse().map_err(value_err)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report serializes")
}

type Trace = (Vec<String>, Vec<f64>, Vec<Vec<f64>>);

/// A fabric network together with its current resistor selection.
#[pyclass(name = "Network", from_py_object)]
#[derive(Clone)]
struct PyNetwork {
    network: FabricNetwork,
    assignment: WeightAssignment,
}

impl PyNetwork {
    fn from_parts(network: FabricNetwork, assignment: WeightAssignment) -> PyResult<Self> {
        let network = network.with_assignment(&assignment).map_err(value_err)?;
        Ok(Self { network, assignment })
    }

    fn table(&self) -> PyResult<TruthTable> {
        Ok(evaluate_truth_table(&self.network, &self.assignment)
            .map_err(runtime_err)?
            .table)
    }
}

#[pymethods]
impl PyNetwork {
    /// Reference 3-4-4-2 network with the shipped learned selection.
    #[staticmethod]
    fn reference() -> PyResult<Self> {
        Self::from_parts(build_reference_network(), reference_assignment())
    }

    #[staticmethod]
    fn from_json(document: &str) -> PyResult<Self> {
        let network = parse_network(document).map_err(value_err)?;
        let assignment = WeightAssignment::from_network(&network);
        Ok(Self { network, assignment })
    }

    fn to_json(&self) -> String {
        self.network.to_json()
    }

    #[getter]
    fn node_ids(&self) -> Vec<String> {
        self.network.nodes.iter().map(|n| n.id.clone()).collect()
    }

    #[getter]
    fn edge_ids(&self) -> Vec<String> {
        self.network.edge_ids()
    }

    #[getter]
    fn rc_node_count(&self) -> usize {
        self.network.rc_node_count()
    }

    #[getter]
    fn option_slots(&self) -> usize {
        self.network.option_slots()
    }

    #[getter]
    fn selected(&self) -> Vec<usize> {
        self.assignment.selected.clone()
    }

    fn assignment_json(&self) -> String {
        self.assignment.to_json(&self.network)
    }

    fn set_assignment_json(&mut self, document: &str) -> PyResult<()> {
        let assignment = WeightAssignment::parse(&self.network, document).map_err(value_err)?;
        *self = Self::from_parts(self.network.clone(), assignment)?;
        Ok(())
    }

    /// Node voltages for one input pattern such as "010".
    fn solve(&self, bits: &str) -> PyResult<Vec<(String, f64)>> {
        let s = solve_pattern(&self.network, pattern(bits)?, &self.assignment).map_err(runtime_err)?;
        Ok(s.node_ids.into_iter().zip(s.voltages).collect())
    }

    /// Output bits for one input pattern.
    fn outputs(&self, bits: &str) -> PyResult<String> {
        Ok(self.table()?.row_string(pattern(bits)?))
    }

    /// Realized table as (pattern, outputs) rows, 000 first.
    fn truth_table(&self) -> PyResult<Vec<(String, String)>> {
        let t = self.table()?;
        Ok(InputPattern::all().map(|p| (p.to_string(), t.row_string(p))).collect())
    }

    /// Gauss-Seidel voltages for cross-checking `solve`.
    #[pyo3(signature = (bits, tol=1e-13, max_sweeps=1_000_000))]
    fn relax(&self, bits: &str, tol: f64, max_sweeps: usize) -> PyResult<Vec<(String, f64)>> {
        let r = relax_solve(&self.network, pattern(bits)?, &self.assignment, tol, max_sweeps).map_err(runtime_err)?;
        Ok(r.node_ids.into_iter().zip(r.voltages).collect())
    }

    /// Times and per-node voltages of an RC transient.
    fn transient(&self, bits: &str, t_end: f64, dt: f64) -> PyResult<Trace> {
        let t = solve_transient(&self.network, pattern(bits)?, &self.assignment, t_end, dt).map_err(value_err)?;
        Ok((t.node_ids, t.times, t.voltages))
    }

    /// Learns a selection for `target` (JSON table, default the reference
    /// table), installs it and returns the JSON summary.
    #[pyo3(signature = (target=None, seed=7, restarts=20, iterations=5000, strategy="steepest"))]
    fn learn(
        &mut self,
        target: Option<&str>,
        seed: u64,
        restarts: usize,
        iterations: usize,
        strategy: &str,
    ) -> PyResult<String> {
        let target = match target {
            Some(doc) => TruthTable::parse(doc).map_err(value_err)?,
            None => TruthTable::reference(),
        };
        let strategy = match strategy {
            "steepest" => SearchStrategy::SteepestSwap,
            "annealing" => SearchStrategy::annealing(),
            other => return Err(value_err(format!("unknown strategy {other:?}"))),
        };
        let config = LearningConfig {
            seed,
            restarts,
            max_iterations: iterations,
            strategy,
            ..LearningConfig::default()
        };
        let result = learn_table(&self.network, &target, &config).map_err(value_err)?;
        *self = Self::from_parts(self.network.clone(), result.assignment.clone())?;
        Ok(to_json(&result))
    }

    /// Zone campaign report as JSON; the default campaign if none given.
    #[pyo3(signature = (campaign=None))]
    fn fault_campaign(&self, campaign: Option<&str>) -> PyResult<String> {
        let campaign = match campaign {
            Some(doc) => Campaign::parse(doc).map_err(value_err)?,
            None => default_campaign(&self.network, &self.assignment).map_err(value_err)?,
        };
        let target = self.table()?;
        let report = zone_campaign(&self.network, &self.assignment, &campaign, &target).map_err(runtime_err)?;
        Ok(to_json(&report))
    }

    /// Monte Carlo stability report as JSON at default jitter unless a
    /// JSON spec is given.
    #[pyo3(signature = (samples, seed, spec=None))]
    fn monte_carlo(&self, samples: usize, seed: u64, spec: Option<&str>) -> PyResult<String> {
        let mut spec = match spec {
            Some(doc) => PerturbationSpec::parse(doc).map_err(value_err)?,
            None => PerturbationSpec::new(samples, seed),
        };
        spec.samples = samples;
        spec.seed = seed;
        let report = run_mc(&self.network, &self.assignment, &spec, Execution::Parallel).map_err(value_err)?;
        Ok(to_json(&report))
    }
}

/// Divider voltage of the default velostat sensor model.
#[pyfunction]
fn sensor_voltage(pressure: f64) -> PyResult<f64> {
    divider_voltage(&PressureSensorModel::default(), pressure).map_err(value_err)
}

/// Realizability problems of a JSON truth table; empty when none are found.
#[pyfunction]
fn realizability_violations(table: &str) -> PyResult<Vec<String>> {
    let t = TruthTable::parse(table).map_err(value_err)?;
    Ok(match check_realizable(&t) {
        Ok(()) => Vec::new(),
        Err(v) => v.iter().map(ToString::to_string).collect(),
    })
}

#[pymodule]
fn fabric_snn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(sensor_voltage, m)?)?;
    m.add_function(wrap_pyfunction!(realizability_violations, m)?)?;
    Ok(())
}
