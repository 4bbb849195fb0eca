//! Velostat pressure-sensor front end and the stimulation trigger event.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{FabricNetwork, InputPattern, NetlistError, WeightAssignment, INPUT_COUNT};
use crate::solver::{
    assemble_dc_system, assemble_with_drives, logic_level, solve_dc, DcSolution, SolverError, TerminalDrive,
};

#[derive(Debug, Error)]
pub enum SensorError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("pressure must be a non-negative number, got {0}")]
    Pressure(f64),
    #[error("invalid sensor model: {0}")]
    Model(String),
    #[error("trigger output {0} is not an output node")]
    TriggerOutput(String),
}

/// Sensor resistance `R(p) = r_pressed + (r_unpressed - r_pressed)·exp(-k·p)`
/// read through a pull-down divider.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PressureSensorModel {
    pub r_unpressed: f64,
    pub r_pressed: f64,
    pub decay: f64,
    pub pull_resistance: f64,
    pub trigger_threshold: f64,
    pub supply_voltage: f64,
}

impl Default for PressureSensorModel {
    fn default() -> Self {
        Self {
            r_unpressed: 10_000.0,
            r_pressed: 500.0,
            decay: 3.0,
            pull_resistance: 1_000.0,
            trigger_threshold: 2.3,
            supply_voltage: 5.0,
        }
    }
}

impl PressureSensorModel {
    pub fn validate(&self) -> Result<(), SensorError> {
        let positive = [
            self.r_pressed,
            self.r_unpressed,
            self.decay,
            self.pull_resistance,
            self.trigger_threshold,
            self.supply_voltage,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(SensorError::Model("all parameters must be positive".into()));
        }
        if self.r_pressed >= self.r_unpressed {
            return Err(SensorError::Model("r_pressed must be below r_unpressed".into()));
        }
        Ok(())
    }

    pub fn resistance(&self, pressure: f64) -> Result<f64, SensorError> {
        if !(pressure >= 0.0) {
            return Err(SensorError::Pressure(pressure));
        }
        Ok(self.r_pressed + (self.r_unpressed - self.r_pressed) * (-self.decay * pressure).exp())
    }
}

pub fn sensor_voltage(model: &PressureSensorModel, pressure: f64) -> Result<f64, SensorError> {
    model.validate()?;
    let r = model.resistance(pressure)?;
    Ok(model.supply_voltage * model.pull_resistance / (r + model.pull_resistance))
}

/// Sensors A, B, C to logic inputs: bit set iff the divider reaches the trigger.
pub fn pressures_to_pattern(model: &PressureSensorModel, pressures: [f64; INPUT_COUNT]) -> Result<InputPattern, SensorError> {
    let mut bits = [false; INPUT_COUNT];
    for (bit, &p) in bits.iter_mut().zip(&pressures) {
        *bit = logic_level(sensor_voltage(model, p)?, model.trigger_threshold);
    }
    Ok(InputPattern { bits })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Stimulus {
    pub current_amps: f64,
    pub frequency_hz: f64,
    pub duration_s: f64,
}

impl Default for Stimulus {
    fn default() -> Self {
        Self {
            current_amps: 3.2e-3,
            frequency_hz: 10_000.0,
            duration_s: 11.0,
        }
    }
}

/// Which pattern and output the stimulation trigger watches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TriggerBinding {
    pub pattern: String,
    pub output: String,
    pub stimulus: Stimulus,
}

impl Default for TriggerBinding {
    fn default() -> Self {
        Self {
            pattern: "111".into(),
            output: "X".into(),
            stimulus: Stimulus::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriggerEvent {
    pub label: String,
    pub pattern: String,
    pub output: String,
    pub output_voltage: f64,
    pub stimulus: Stimulus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// Sensor bits drive the terminals at supply or per grounding mode.
    #[default]
    Logic,
    /// Divider voltages drive the terminals directly.
    Analog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    pub pressures: [f64; INPUT_COUNT],
}

pub fn parse_scenarios(document: &str) -> Result<Vec<Scenario>, SensorError> {
    Ok(serde_json::from_str(document).map_err(NetlistError::from)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub label: String,
    pub pressures: [f64; INPUT_COUNT],
    pub sensor_voltages: [f64; INPUT_COUNT],
    pub pattern: String,
    pub outputs: String,
    pub solution: DcSolution,
    pub trigger: Option<TriggerEvent>,
}

pub fn run_scenario(
    network: &FabricNetwork,
    assignment: &WeightAssignment,
    model: &PressureSensorModel,
    scenario: &Scenario,
    mode: InputMode,
    binding: &TriggerBinding,
) -> Result<ScenarioResult, SensorError> {
    let pattern = pressures_to_pattern(model, scenario.pressures)?;
    let mut sensor_voltages = [0.0; INPUT_COUNT];
    for (v, &p) in sensor_voltages.iter_mut().zip(&scenario.pressures) {
        *v = sensor_voltage(model, p)?;
    }
    let system = match mode {
        InputMode::Logic => assemble_dc_system(network, pattern, assignment)?,
        InputMode::Analog => {
            let drives: Vec<TerminalDrive> = sensor_voltages.iter().map(|&v| TerminalDrive::Source(v)).collect();
            assemble_with_drives(network, &drives, assignment)?
        }
    };
    let solution = solve_dc(&system)?;
    let watched = solution
        .outputs
        .iter()
        .find(|o| o.node == binding.output)
        .ok_or_else(|| SensorError::TriggerOutput(binding.output.clone()))?;
    let trigger = (pattern.to_string() == binding.pattern && watched.bit).then(|| TriggerEvent {
        label: scenario.label.clone(),
        pattern: pattern.to_string(),
        output: watched.node.clone(),
        output_voltage: watched.voltage,
        stimulus: binding.stimulus,
    });
    Ok(ScenarioResult {
        label: scenario.label.clone(),
        pressures: scenario.pressures,
        sensor_voltages,
        pattern: pattern.to_string(),
        outputs: solution.outputs.iter().map(|o| if o.bit { '1' } else { '0' }).collect(),
        solution,
        trigger,
    })
}

/// Runs every scenario in order and collects the trigger events.
pub fn run_scenarios(
    network: &FabricNetwork,
    assignment: &WeightAssignment,
    model: &PressureSensorModel,
    scenarios: &[Scenario],
    mode: InputMode,
    binding: &TriggerBinding,
) -> Result<(Vec<ScenarioResult>, Vec<TriggerEvent>), SensorError> {
    let results = scenarios
        .iter()
        .map(|s| run_scenario(network, assignment, model, s, mode, binding))
        .collect::<Result<Vec<_>, _>>()?;
    let events = results.iter().filter_map(|r| r.trigger.clone()).collect();
    Ok((results, events))
}

/// One JSON object per line.
pub fn event_log(events: &[TriggerEvent]) -> String {
    events
        .iter()
        .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
        .collect()
}

/// Touch pressures giving a clear press and no press under the default model.
pub const TOUCH_PRESSURE: f64 = 1.5;
pub const FIRM_PRESSURE: f64 = 3.0;

/// The eight forearm touch scenarios, 000 to 111.
pub fn touch_scenarios() -> Vec<Scenario> {
    let labels = [
        "No touch sensation on forearm",
        "Light touch to sensor C, base thumb area",
        "Sensor B, forearm lean against wall surface area detect pressure",
        "Folding arms movement, touch base thumb sensor C and sensor B area on forearm",
        "Forearm shake, with contact made to sensor A",
        "User lays arm on table surface or chair arm, contact on sensors A and C",
        "Arm grabbed with enhanced pressure below forearm elbow joint, sensors A and B",
        "Another person grabs the wearer's arm with both arms, sensors A, B and C",
    ];
    labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let p = InputPattern::from_index(i);
            let level = match i {
                1 => 0.6 * TOUCH_PRESSURE,
                6 | 7 => FIRM_PRESSURE,
                _ => TOUCH_PRESSURE,
            };
            let mut pressures = [0.0; INPUT_COUNT];
            for (v, &b) in pressures.iter_mut().zip(&p.bits) {
                if b {
                    *v = level;
                }
            }
            Scenario {
                label: label.to_string(),
                pressures,
            }
        })
        .collect()
}
