//! Monte Carlo resistance jitter: component tolerance plus thread and contact
//! series resistance on every edge, with per-output voltage statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{FabricNetwork, InputPattern, NetlistError, WeightAssignment};
use crate::solver::{logic_level, Circuit, SolverError};

#[derive(Debug, Error)]
pub enum PerturbationError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("perturbation spec {label:?}: {message}")]
    Spec { label: String, message: String },
    #[error("scenario sweep needs at least one spec")]
    NoScenarios,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OhmRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    #[default]
    Uniform,
    /// Normal with 3σ at the range edge, truncated to the range.
    Gaussian,
}

fn default_tolerance() -> f64 {
    0.01
}

fn default_thread() -> OhmRange {
    // < 100 Ω/m thread over runs of about 0.1 m.
    OhmRange { min: 0.0, max: 10.0 }
}

fn default_contact() -> OhmRange {
    OhmRange { min: 0.0, max: 5.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    #[serde(default)]
    pub label: String,
    /// Relative tolerance on each stitched resistor.
    #[serde(default = "default_tolerance")]
    pub resistor_tolerance: f64,
    /// Series thread resistance per edge.
    #[serde(default = "default_thread")]
    pub thread_resistance: OhmRange,
    /// Series contact resistance per edge.
    #[serde(default = "default_contact")]
    pub contact_resistance: OhmRange,
    #[serde(default)]
    pub distribution: Distribution,
    pub samples: usize,
    pub seed: u64,
}

impl PerturbationSpec {
    /// Default jitter magnitudes.
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            label: String::new(),
            resistor_tolerance: default_tolerance(),
            thread_resistance: default_thread(),
            contact_resistance: default_contact(),
            distribution: Distribution::Uniform,
            samples,
            seed,
        }
    }

    /// No jitter at all.
    pub fn zero(samples: usize, seed: u64) -> Self {
        Self {
            resistor_tolerance: 0.0,
            thread_resistance: OhmRange { min: 0.0, max: 0.0 },
            contact_resistance: OhmRange { min: 0.0, max: 0.0 },
            ..Self::new(samples, seed)
        }
    }

    /// Same spec with every jitter magnitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64, label: impl Into<String>) -> Self {
        let scale = |r: OhmRange| OhmRange {
            min: r.min * factor,
            max: r.max * factor,
        };
        Self {
            label: label.into(),
            resistor_tolerance: self.resistor_tolerance * factor,
            thread_resistance: scale(self.thread_resistance),
            contact_resistance: scale(self.contact_resistance),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), PerturbationError> {
        let fail = |message: &str| {
            Err(PerturbationError::Spec {
                label: self.label.clone(),
                message: message.to_string(),
            })
        };
        if self.samples == 0 {
            return fail("samples must be at least 1");
        }
        if !(self.resistor_tolerance >= 0.0 && self.resistor_tolerance < 1.0) {
            return fail("resistor_tolerance must lie in [0, 1)");
        }
        for (name, r) in [("thread_resistance", self.thread_resistance), ("contact_resistance", self.contact_resistance)] {
            if !(r.min >= 0.0 && r.max >= r.min && r.max.is_finite()) {
                return fail(&format!("{name} needs 0 <= min <= max"));
            }
        }
        Ok(())
    }

    pub fn parse(document: &str) -> Result<Self, PerturbationError> {
        let spec: Self = serde_json::from_str(document).map_err(NetlistError::from)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn parse_list(document: &str) -> Result<Vec<Self>, PerturbationError> {
        let specs: Vec<Self> = serde_json::from_str(document).map_err(NetlistError::from)?;
        for s in &specs {
            s.validate()?;
        }
        Ok(specs)
    }
}

/// Draw in [-1, 1]: uniform, or a truncated normal with σ = 1/3.
fn unit_draw(rng: &mut ChaCha8Rng, distribution: Distribution) -> f64 {
    match distribution {
        Distribution::Uniform => rng.gen_range(-1.0..=1.0),
        Distribution::Gaussian => {
            let z: f64 = rng.sample(StandardNormal);
            (z / 3.0).clamp(-1.0, 1.0)
        }
    }
}

fn in_range(r: OhmRange, unit: f64) -> f64 {
    let mid = 0.5 * (r.min + r.max);
    mid + 0.5 * (r.max - r.min) * unit
}

/// Jittered value of each edge's stitched resistor for one sample.
fn perturbed_values(nominal: &[f64], spec: &PerturbationSpec, sample: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(sample);
    nominal
        .iter()
        .map(|&r| {
            let u = unit_draw(&mut rng, spec.distribution);
            let thread = unit_draw(&mut rng, spec.distribution);
            let contact = unit_draw(&mut rng, spec.distribution);
            r * (1.0 + spec.resistor_tolerance * u)
                + in_range(spec.thread_resistance, thread)
                + in_range(spec.contact_resistance, contact)
        })
        .collect()
}

fn stitched(network: &FabricNetwork) -> Vec<f64> {
    network
        .edges
        .iter()
        .map(|e| e.options.get(e.selected).unwrap_or(f64::NAN))
        .collect()
}

/// Copy of `network` with its stitched resistors jittered. Deterministic in
/// (`spec.seed`, `sample`); unselected options are left alone.
pub fn sample_network(
    network: &FabricNetwork,
    spec: &PerturbationSpec,
    sample: u64,
) -> Result<FabricNetwork, PerturbationError> {
    spec.validate()?;
    WeightAssignment::from_network(network).check(network)?;
    let values = perturbed_values(&stitched(network), spec, sample);
    let mut copy = network.clone();
    for (edge, v) in copy.edges.iter_mut().zip(values) {
        let sel = edge.selected;
        edge.options.values_mut()[sel] = v;
    }
    Ok(copy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityCell {
    pub pattern: String,
    pub output: String,
    pub nominal: f64,
    /// Nominal `V - threshold`.
    pub nominal_margin: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub mean: f64,
    /// Fraction of solved samples whose readout differs from nominal.
    pub flip_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub label: String,
    pub samples: usize,
    pub seed: u64,
    pub failed_samples: usize,
    /// Pattern-major, outputs in netlist order.
    pub cells: Vec<StabilityCell>,
    /// Every sampled node voltage lay in [0, supply].
    pub within_bounds: bool,
    /// Pairs of cells where the larger |margin| flipped more often.
    pub monotonicity_flags: Vec<String>,
}

impl StabilityReport {
    pub fn cell(&self, pattern: &str, output: &str) -> Option<&StabilityCell> {
        self.cells.iter().find(|c| c.pattern == pattern && c.output == output)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("pattern,output,vmin,vmax,mean,flip_rate\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{:.9},{:.9},{:.9},{:.6}\n",
                c.pattern, c.output, c.v_min, c.v_max, c.mean, c.flip_rate
            ));
        }
        out
    }
}

/// Output voltages per pattern for one sample, plus whether all node
/// voltages were in range.
type SampleOutcome = Option<(Vec<Vec<f64>>, bool)>;

fn run_sample(circuit: &Circuit, nominal: &[f64], selected: &[usize], spec: &PerturbationSpec, sample: u64) -> SampleOutcome {
    let mut c = circuit.clone();
    for (edge, (v, &sel)) in c.edges.iter_mut().zip(perturbed_values(nominal, spec, sample).into_iter().zip(selected)) {
        edge.options[sel] = v;
    }
    let volts = c.table_voltages(selected).ok()?;
    let tol = 1e-9 * c.supply;
    let bounded = volts
        .iter()
        .flatten()
        .all(|&v| v >= -tol && v <= c.supply + tol);
    let outs = volts
        .iter()
        .map(|v| c.outputs.iter().map(|&o| v[o]).collect())
        .collect();
    Some((outs, bounded))
}

pub fn monte_carlo(
    network: &FabricNetwork,
    assignment: &WeightAssignment,
    spec: &PerturbationSpec,
    execution: Execution,
) -> Result<StabilityReport, PerturbationError> {
    spec.validate()?;
    let network = network.with_assignment(assignment)?;
    let circuit = Circuit::compile(&network)?;
    let baseline = circuit.table_voltages(&assignment.selected)?;
    let nominal = stitched(&network);
    let run = |i: usize| run_sample(&circuit, &nominal, &assignment.selected, spec, i as u64);
    let outcomes: Vec<SampleOutcome> = match execution {
        Execution::Serial => (0..spec.samples).map(run).collect(),
        Execution::Parallel => (0..spec.samples).into_par_iter().map(run).collect(),
    };

    let th = circuit.threshold;
    let solved: Vec<&(Vec<Vec<f64>>, bool)> = outcomes.iter().flatten().collect();
    let failed_samples = spec.samples - solved.len();
    let within_bounds = solved.iter().all(|(_, b)| *b);
    let mut cells = Vec::new();
    for p in InputPattern::all() {
        for (k, &o) in circuit.outputs.iter().enumerate() {
            let nominal_v = baseline[p.index()][o];
            let nominal_bit = logic_level(nominal_v, th);
            let (mut lo, mut hi, mut sum, mut flips) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
            for (outs, _) in &solved {
                let v = outs[p.index()][k];
                lo = lo.min(v);
                hi = hi.max(v);
                sum += v;
                flips += usize::from(logic_level(v, th) != nominal_bit);
            }
            let n = solved.len();
            let (v_min, v_max, mean, flip_rate) = if n == 0 {
                (f64::NAN, f64::NAN, f64::NAN, 0.0)
            } else {
                // Summation error can put the mean a hair outside [lo, hi].
                (lo, hi, (sum / n as f64).clamp(lo, hi), flips as f64 / n as f64)
            };
            cells.push(StabilityCell {
                pattern: p.to_string(),
                output: circuit.ids[o].clone(),
                nominal: nominal_v,
                nominal_margin: nominal_v - th,
                v_min,
                v_max,
                mean,
                flip_rate,
            });
        }
    }
    let monotonicity_flags = monotonicity_flags(&cells);
    Ok(StabilityReport {
        label: spec.label.clone(),
        samples: spec.samples,
        seed: spec.seed,
        failed_samples,
        cells,
        within_bounds,
        monotonicity_flags,
    })
}

fn monotonicity_flags(cells: &[StabilityCell]) -> Vec<String> {
    let mut order: Vec<&StabilityCell> = cells.iter().collect();
    order.sort_by(|a, b| a.nominal_margin.abs().total_cmp(&b.nominal_margin.abs()));
    let mut flags = Vec::new();
    for (i, near) in order.iter().enumerate() {
        for far in &order[i + 1..] {
            if far.nominal_margin.abs() > near.nominal_margin.abs() && far.flip_rate > near.flip_rate {
                flags.push(format!(
                    "{} {} (|margin| {:.4} V) flips at {:.4} but {} {} (|margin| {:.4} V) at {:.4}",
                    far.pattern,
                    far.output,
                    far.nominal_margin.abs(),
                    far.flip_rate,
                    near.pattern,
                    near.output,
                    near.nominal_margin.abs(),
                    near.flip_rate
                ));
            }
        }
    }
    flags
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanDelta {
    pub scenario: String,
    pub pattern: String,
    pub output: String,
    /// Mean of this scenario minus mean of the first.
    pub delta_mean: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub scenarios: Vec<StabilityReport>,
    pub deltas: Vec<MeanDelta>,
}

pub fn scenario_sweep(
    network: &FabricNetwork,
    assignment: &WeightAssignment,
    specs: &[PerturbationSpec],
    execution: Execution,
) -> Result<SweepReport, PerturbationError> {
    if specs.is_empty() {
        return Err(PerturbationError::NoScenarios);
    }
    for s in specs {
        s.validate()?;
    }
    let scenarios = specs
        .iter()
        .map(|s| monte_carlo(network, assignment, s, execution))
        .collect::<Result<Vec<_>, _>>()?;
    let base = &scenarios[0];
    let deltas = scenarios
        .iter()
        .flat_map(|s| {
            s.cells.iter().zip(&base.cells).map(move |(c, b)| MeanDelta {
                scenario: s.label.clone(),
                pattern: c.pattern.clone(),
                output: c.output.clone(),
                delta_mean: c.mean - b.mean,
                spread: c.v_max - c.v_min,
            })
        })
        .collect();
    Ok(SweepReport { scenarios, deltas })
}
