//! Method-of-lines simulator for the two-component system on a truncated
//! line, front tracking, and the comparison-type oracles used to check it.

mod convolve;
mod front;
mod grid;
mod initial;
mod oracles;
mod simulate;

use thiserror::Error;

use crate::dispersion::DispersionError;
use crate::kernels::KernelError;

pub use convolve::{ConvolutionMethod, Convolver, DiscreteKernel};
pub use front::{estimate_speed, FrontSample, FrontTrace, SpeedFit, MIN_FIT_SAMPLES};
pub use grid::{FieldState, Grid};
pub use initial::InitialData;
pub use oracles::{
    check_comparison, check_monotone, degenerate_ode_deviation, MonotoneCheck, UpperEnvelope,
};
pub use simulate::{stability_bound, SimConfig, Simulator, Trajectory, BOX_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error("invalid simulation setup: {0}")]
    InvalidConfig(String),
    #[error("state left the unit box at t = {t}: value {value} in cell {cell}")]
    BoxViolation { t: f64, cell: usize, value: f64 },
    #[error("front reached the boundary region at t = {t}: max(u, v) = {value:e}")]
    BoundaryContamination { t: f64, value: f64 },
    #[error("need at least {needed} front samples in the fit window, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("initial data exceed the upper envelope at x = {x}")]
    InitialDominationFailure { x: f64 },
    #[error("runs are not comparable: {0}")]
    ConfigMismatch(String),
}

pub type Result<T, E = DynamicsError> = std::result::Result<T, E>;
