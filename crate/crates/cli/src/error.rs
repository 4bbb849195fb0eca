use std::fmt;

use fabric_snn::faults::FaultError;
use fabric_snn::learning::LearningError;
use fabric_snn::netlist::NetlistError;
use fabric_snn::oracle::OracleError;
use fabric_snn::perturbation::PerturbationError;
use fabric_snn::sensors::SensorError;
use fabric_snn::SolverError;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Objective = 1,
    Input = 2,
    Numeric = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl fmt::Display) -> Self {
        Self {
            exit: Exit::Input,
            message: message.to_string(),
        }
    }

    pub fn numeric(message: impl fmt::Display) -> Self {
        Self {
            exit: Exit::Numeric,
            message: message.to_string(),
        }
    }

    pub fn objective(message: impl fmt::Display) -> Self {
        Self {
            exit: Exit::Objective,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;

impl From<NetlistError> for CliError {
    fn from(e: NetlistError) -> Self {
        Self::input(e)
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Netlist(_) | SolverError::Parameters(_) | SolverError::Isolated { .. } => Self::input(e),
            SolverError::Singular | SolverError::Residual { .. } => Self::numeric(e),
        }
    }
}

impl From<LearningError> for CliError {
    fn from(e: LearningError) -> Self {
        match e {
            LearningError::Solver(s) => s.into(),
            other => Self::input(other),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Solver(s) => s.into(),
            OracleError::NotConverged(_) => Self::numeric(e),
            other => Self::input(other),
        }
    }
}

impl From<FaultError> for CliError {
    fn from(e: FaultError) -> Self {
        match e {
            FaultError::Solver(s) => s.into(),
            other => Self::input(other),
        }
    }
}

impl From<PerturbationError> for CliError {
    fn from(e: PerturbationError) -> Self {
        match e {
            PerturbationError::Solver(s) => s.into(),
            other => Self::input(other),
        }
    }
}

impl From<SensorError> for CliError {
    fn from(e: SensorError) -> Self {
        match e {
            SensorError::Solver(s) => s.into(),
            other => Self::input(other),
        }
    }
}
