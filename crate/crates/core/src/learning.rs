//! Offline weight selection: discrete local search over which palette
//! resistor is stitched into each connection so the network realizes a
//! target truth table.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{FabricNetwork, InputPattern, NetlistError, TruthTable, WeightAssignment};
use crate::solver::{logic_level, Circuit, SolverError};

#[derive(Debug, Error)]
pub enum LearningError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("invalid learning config: {0}")]
    Config(String),
    #[error("target table has {target} outputs but the network has {network}")]
    Width { target: usize, network: usize },
    #[error("margin improvement needs an exact assignment; current error is {0}")]
    NotExact(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchStrategy {
    SteepestSwap,
    /// Single-edge Metropolis moves on `error - margin_weight * min_margin`,
    /// cooled geometrically once per sweep, then a steepest-swap polish.
    Annealing {
        initial_temperature: f64,
        cooling: f64,
        margin_weight: f64,
    },
}

impl SearchStrategy {
    pub fn annealing() -> Self {
        Self::Annealing {
            initial_temperature: 2.0,
            cooling: 0.95,
            margin_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondaryObjective {
    None,
    MaxMinMargin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningConfig {
    pub seed: u64,
    pub restarts: usize,
    /// Sweeps per restart. One sweep visits every single-edge swap once.
    pub max_iterations: usize,
    pub strategy: SearchStrategy,
    pub secondary: SecondaryObjective,
}

impl Default for LearningConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            restarts: 20,
            max_iterations: 5000,
            strategy: SearchStrategy::SteepestSwap,
            secondary: SecondaryObjective::MaxMinMargin,
        }
    }
}

impl LearningConfig {
    fn check(&self) -> Result<(), LearningError> {
        if self.restarts == 0 {
            return Err(LearningError::Config("restarts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(LearningError::Config("max_iterations must be at least 1".into()));
        }
        if let SearchStrategy::Annealing {
            initial_temperature,
            cooling,
            margin_weight,
        } = self.strategy
        {
            if !(initial_temperature > 0.0) || !(cooling > 0.0 && cooling < 1.0) || margin_weight < 0.0 {
                return Err(LearningError::Config(
                    "annealing needs T0 > 0, cooling in (0,1), margin_weight >= 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Count of output-bit mismatches between two tables (0..=8*width).
pub fn table_error(realized: &TruthTable, target: &TruthTable) -> u32 {
    InputPattern::all()
        .map(|p| {
            let (r, t) = (realized.row(p), target.row(p));
            let shared = r.iter().zip(t).filter(|(a, b)| a != b).count();
            shared + r.len().abs_diff(t.len())
        })
        .sum::<usize>() as u32
}

/// Search objective: mismatched bits, then the smallest target-oriented
/// margin (positive when the bit is right, negative by how far it is wrong).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Score {
    pub error: u32,
    pub min_margin: f64,
}

impl Score {
    pub fn better_than(&self, other: &Score) -> bool {
        self.error < other.error || (self.error == other.error && self.min_margin > other.min_margin)
    }

    fn better_under(&self, other: &Score, secondary: SecondaryObjective) -> bool {
        match secondary {
            SecondaryObjective::None => self.error < other.error,
            SecondaryObjective::MaxMinMargin => self.better_than(other),
        }
    }
}

pub(crate) fn score_voltages(circuit: &Circuit, volts: &[Vec<f64>], target: &TruthTable) -> Score {
    let th = circuit.threshold;
    let mut error = 0;
    let mut min_margin = f64::INFINITY;
    for (pattern, want) in target.rows() {
        for (&node, &bit) in circuit.outputs.iter().zip(want) {
            let v = volts[pattern.index()][node];
            if logic_level(v, th) != bit {
                error += 1;
            }
            let m = if bit { v - th } else { th - v };
            min_margin = min_margin.min(m);
        }
    }
    Score { error, min_margin }
}

fn margin_sum(circuit: &Circuit, volts: &[Vec<f64>], target: &TruthTable) -> f64 {
    let th = circuit.threshold;
    target
        .rows()
        .flat_map(|(p, want)| {
            circuit
                .outputs
                .iter()
                .zip(want)
                .map(move |(&node, &bit)| (p, node, bit))
        })
        .map(|(p, node, bit)| {
            let v = volts[p.index()][node];
            if bit {
                v - th
            } else {
                th - v
            }
        })
        .sum()
}

struct Evaluator<'a> {
    circuit: Circuit,
    target: &'a TruthTable,
}

impl<'a> Evaluator<'a> {
    fn new(network: &FabricNetwork, target: &'a TruthTable) -> Result<Self, LearningError> {
        let circuit = Circuit::compile(network)?;
        if circuit.outputs.len() != target.width() {
            return Err(LearningError::Width {
                target: target.width(),
                network: circuit.outputs.len(),
            });
        }
        Ok(Self { circuit, target })
    }

    fn score(&self, selected: &[usize]) -> Option<Score> {
        let volts = self.circuit.table_voltages(selected).ok()?;
        Some(score_voltages(&self.circuit, &volts, self.target))
    }

    fn score_with_sum(&self, selected: &[usize]) -> Option<(Score, f64)> {
        let volts = self.circuit.table_voltages(selected).ok()?;
        Some((
            score_voltages(&self.circuit, &volts, self.target),
            margin_sum(&self.circuit, &volts, self.target),
        ))
    }

    fn radices(&self) -> Vec<usize> {
        self.circuit.edges.iter().map(|e| e.options.len()).collect()
    }
}

const WORST: Score = Score {
    error: u32::MAX,
    min_margin: f64::NEG_INFINITY,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub initial_error: u32,
    pub initial_min_margin: f64,
    pub final_error: u32,
    pub final_min_margin: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearningResult {
    pub assignment: WeightAssignment,
    /// Mismatched output bits of `assignment` against the target.
    pub error: u32,
    /// Smallest target-oriented margin over rows and outputs, volts.
    pub min_margin: f64,
    pub iterations: usize,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
    /// False when the search could not move away from its starting point.
    pub improved: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RealizabilityViolation {
    /// All-zero inputs give 0 V everywhere, so every output reads 0.
    ZeroInputRow { output: usize },
    /// `lower` is a bitwise subset of `upper` but drives output high only on `lower`.
    Monotonicity {
        lower: String,
        upper: String,
        output: usize,
    },
}

impl fmt::Display for RealizabilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroInputRow { output } => write!(f, "zero-input row: output {output} must read 0 on 000"),
            Self::Monotonicity { lower, upper, output } => write!(
                f,
                "monotonicity: output {output} is 1 on {lower} but 0 on its superset {upper}"
            ),
        }
    }
}

/// Necessary conditions for a table to be realizable by a passive network
/// with grounded zero inputs: 000 maps to all zeros and outputs are
/// monotone in the input bits.
pub fn check_realizable(target: &TruthTable) -> Result<(), Vec<RealizabilityViolation>> {
    let mut out = Vec::new();
    let zero = InputPattern::from_index(0);
    for (j, &bit) in target.row(zero).iter().enumerate() {
        if bit {
            out.push(RealizabilityViolation::ZeroInputRow { output: j });
        }
    }
    for lower in InputPattern::all() {
        for upper in InputPattern::all() {
            if lower == upper || !lower.is_subset_of(&upper) {
                continue;
            }
            for (j, (&lo, &hi)) in target.row(lower).iter().zip(target.row(upper)).enumerate() {
                if lo && !hi {
                    out.push(RealizabilityViolation::Monotonicity {
                        lower: lower.to_string(),
                        upper: upper.to_string(),
                        output: j,
                    });
                }
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Best single-edge swap from `selected` that beats `current` under `better`.
/// Candidates are visited by edge then option index, so the first of equal
/// candidates wins.
fn best_swap<K: Copy>(
    selected: &[usize],
    radices: &[usize],
    current: K,
    eval: impl Fn(&[usize]) -> Option<K>,
    better: impl Fn(&K, &K) -> bool,
) -> Option<(usize, usize, K)> {
    let mut trial = selected.to_vec();
    let mut best: Option<(usize, usize, K)> = None;
    for (e, &radix) in radices.iter().enumerate() {
        let original = trial[e];
        for opt in 0..radix {
            if opt == original {
                continue;
            }
            trial[e] = opt;
            if let Some(k) = eval(&trial) {
                let beats_current = better(&k, &current);
                let beats_best = best.as_ref().is_none_or(|(_, _, b)| better(&k, b));
                if beats_current && beats_best {
                    best = Some((e, opt, k));
                }
            }
        }
        trial[e] = original;
    }
    best
}

fn steepest(
    eval: &Evaluator<'_>,
    selected: &mut [usize],
    mut score: Score,
    secondary: SecondaryObjective,
    budget: usize,
) -> (Score, usize) {
    let radices = eval.radices();
    let mut sweeps = 0;
    while sweeps < budget {
        sweeps += 1;
        // Equal-error candidates are still ranked by margin.
        let better = |a: &Score, b: &Score| a.better_than(b);
        let pick = best_swap(selected, &radices, WORST, |s| eval.score(s), better);
        match pick {
            Some((e, opt, k)) if k.better_under(&score, secondary) => {
                selected[e] = opt;
                score = k;
            }
            _ => break,
        }
    }
    (score, sweeps)
}

fn anneal(
    eval: &Evaluator<'_>,
    selected: &mut Vec<usize>,
    start: Score,
    config: &LearningConfig,
    rng: &mut ChaCha8Rng,
) -> (Score, usize) {
    let SearchStrategy::Annealing {
        initial_temperature,
        cooling,
        margin_weight,
    } = config.strategy
    else {
        unreachable!("anneal called with a non-annealing strategy");
    };
    let energy = |s: &Score| s.error as f64 - margin_weight * s.min_margin;
    let radices = eval.radices();
    let mut current = start;
    let mut best = (start, selected.clone());
    let mut temperature = initial_temperature;
    let mut sweeps = 0;
    while sweeps < config.max_iterations && temperature > 1e-3 {
        sweeps += 1;
        for (e, &radix) in radices.iter().enumerate() {
            if radix < 2 {
                continue;
            }
            let old = selected[e];
            let mut opt = rng.gen_range(0..radix - 1);
            if opt >= old {
                opt += 1;
            }
            selected[e] = opt;
            let Some(trial) = eval.score(selected) else {
                selected[e] = old;
                continue;
            };
            let delta = energy(&trial) - energy(&current);
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp() {
                current = trial;
                if trial.better_under(&best.0, config.secondary) {
                    best = (trial, selected.clone());
                }
            } else {
                selected[e] = old;
            }
        }
        temperature *= cooling;
    }
    *selected = best.1;
    let remaining = config.max_iterations.saturating_sub(sweeps).max(1);
    let (score, polish) = steepest(eval, selected, best.0, config.secondary, remaining);
    (score, sweeps + polish)
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Local search with restarts. Restart 0 starts from all-index-0, later
/// restarts from seeded random selections; restarts are independent and
/// the winner is the lowest (error, -min_margin, restart index).
pub fn learn(
    network: &FabricNetwork,
    target: &TruthTable,
    config: &LearningConfig,
) -> Result<LearningResult, LearningError> {
    config.check()?;
    let eval = Evaluator::new(network, target)?;
    let radices = eval.radices();
    let warnings: Vec<String> = match check_realizable(target) {
        Ok(()) => Vec::new(),
        Err(v) => v.iter().map(|x| format!("target not realizable: {x}")).collect(),
    };

    let runs: Vec<(RestartSummary, Score, Vec<usize>)> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = restart_rng(config.seed, restart);
            let mut selected: Vec<usize> = if restart == 0 {
                vec![0; radices.len()]
            } else {
                radices.iter().map(|&r| rng.gen_range(0..r)).collect()
            };
            let initial = eval.score(&selected).unwrap_or(WORST);
            let (score, iterations) = match config.strategy {
                SearchStrategy::SteepestSwap => {
                    steepest(&eval, &mut selected, initial, config.secondary, config.max_iterations)
                }
                SearchStrategy::Annealing { .. } => anneal(&eval, &mut selected, initial, config, &mut rng),
            };
            let summary = RestartSummary {
                restart,
                initial_error: initial.error,
                initial_min_margin: initial.min_margin,
                final_error: score.error,
                final_min_margin: score.min_margin,
                iterations,
            };
            (summary, score, selected)
        })
        .collect();

    let best = runs
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            a.1.error
                .cmp(&b.1.error)
                .then(b.1.min_margin.total_cmp(&a.1.min_margin))
        })
        .map(|(i, _)| i)
        .expect("at least one restart");
    let (ref summary, score, ref selected) = runs[best];
    Ok(LearningResult {
        assignment: WeightAssignment {
            selected: selected.clone(),
        },
        error: score.error,
        min_margin: score.min_margin,
        iterations: runs.iter().map(|r| r.0.iterations).sum(),
        best_restart: best,
        improved: score.better_than(&Score {
            error: summary.initial_error,
            min_margin: summary.initial_min_margin,
        }),
        restarts: runs.iter().map(|r| r.0.clone()).collect(),
        warnings,
    })
}

/// Hill-climbs the smallest margin of an exact assignment, never accepting
/// a swap that breaks a row. Plateaus on the minimum are crossed by the
/// margin sum, which only ever rises alongside it.
pub fn improve_margins(
    network: &FabricNetwork,
    assignment: &WeightAssignment,
    target: &TruthTable,
    config: &LearningConfig,
) -> Result<LearningResult, LearningError> {
    config.check()?;
    assignment.check(network)?;
    let eval = Evaluator::new(network, target)?;
    let radices = eval.radices();
    let mut selected = assignment.selected.clone();
    let (start, start_sum) = eval.score_with_sum(&selected).ok_or(SolverError::Singular)?;
    if start.error != 0 {
        return Err(LearningError::NotExact(start.error));
    }
    let better = |a: &(Score, f64), b: &(Score, f64)| {
        a.0.error == 0 && (a.0.min_margin > b.0.min_margin || (a.0.min_margin == b.0.min_margin && a.1 > b.1))
    };
    let mut current = (start, start_sum);
    let mut sweeps = 0;
    while sweeps < config.max_iterations {
        sweeps += 1;
        match best_swap(&selected, &radices, current, |s| eval.score_with_sum(s), better) {
            Some((e, opt, k)) => {
                selected[e] = opt;
                current = k;
            }
            None => break,
        }
    }
    let improved = selected != assignment.selected;
    Ok(LearningResult {
        assignment: WeightAssignment { selected },
        error: current.0.error,
        min_margin: current.0.min_margin,
        iterations: sweeps,
        best_restart: 0,
        restarts: vec![RestartSummary {
            restart: 0,
            initial_error: 0,
            initial_min_margin: start.min_margin,
            final_error: current.0.error,
            final_min_margin: current.0.min_margin,
            iterations: sweeps,
        }],
        improved,
        warnings: Vec::new(),
    })
}
