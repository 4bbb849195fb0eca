//! Software model of a fabric spiking neural network built as a passive
//! resistive crossbar with RC integrate-and-fire nodes.
//!
//! - [`netlist`]: network data model, reference 3-4-4-2 build, JSON format
//! - [`solver`]: DC operating point, RC transients, truth-table readout
//! - [`oracle`]: Gauss-Seidel relaxation and exhaustive search cross-checks
//! - [`learning`]: discrete resistor-selection search for a target table
//! - [`faults`]: disconnection campaigns and voltage-shift reports
//! - [`perturbation`]: Monte Carlo resistor/thread/contact jitter
//! - [`sensors`]: pressure-sensor front end and stimulation trigger

pub mod faults;
pub mod learning;
pub mod netlist;
pub mod oracle;
pub mod perturbation;
pub mod reference;
pub mod sensors;
pub mod solver;
pub mod synth;

pub use learning::{learn, LearningConfig, LearningResult};
pub use netlist::{
    build_reference_network, parse_network, FabricNetwork, GroundingMode, InputPattern, TruthTable,
    WeightAssignment,
};
pub use solver::{evaluate_truth_table, solve_dc, solve_pattern, DcSolution, SolverError};
