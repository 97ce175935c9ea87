use nonlocal_spread::dispersion::DispersionError;
use nonlocal_spread::dynamics::DynamicsError;
use nonlocal_spread::kernels::KernelError;
use thiserror::Error;

use crate::config::Loc;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid configuration, including parameters rejected
    /// by the library's hypothesis checks. Exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// Root finding or evaluation failed on a valid configuration. Exit 3.
    #[error("math error: {0}")]
    Math(String),
    /// The simulation stopped early. Exit 4.
    #[error("simulation aborted: {0}")]
    Abort(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn config(loc: &Loc, msg: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{loc}: {msg}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Math(_) => 3,
            CliError::Abort(_) => 4,
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::Overflow { .. } => CliError::Math(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<DispersionError> for CliError {
    fn from(e: DispersionError) -> Self {
        match e {
            DispersionError::Kernel(k) => k.into(),
            DispersionError::InvalidParams(_) | DispersionError::Unproven => CliError::Config(e.to_string()),
            _ => CliError::Math(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Kernel(k) => k.into(),
            DynamicsError::Dispersion(d) => d.into(),
            DynamicsError::InvalidConfig(_) | DynamicsError::ConfigMismatch(_) => CliError::Config(e.to_string()),
            DynamicsError::InitialDominationFailure { .. } => CliError::Math(e.to_string()),
            DynamicsError::BoxViolation { .. }
            | DynamicsError::BoundaryContamination { .. }
            | DynamicsError::InsufficientSamples { .. } => CliError::Abort(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
