//! Linearised dispersion machinery: the speed functional `c(lambda)`, its
//! extrema, the sign classification of the spreading speeds, and the inverse
//! problems for the asymmetry index and the critical mobility.

mod critical;
mod lemmas;
mod nonlinearity;
mod params;
mod speeds;
mod system;

use thiserror::Error;

use crate::kernels::KernelError;

pub use critical::{kappa_index, omega_root, omega_gap, sigma_star, CriticalMobility, MobilityFamily};
pub use lemmas::{aux_lemma43, aux_profile, gh_interval, AuxBounds, GhInterval, Side};
pub use nonlinearity::{MonotoneSpline, Nonlinearity};
pub use params::{ModelParams, Rates};
pub use speeds::{
    classify_by_signs, classify_propagation, lambda_set, locate_speeds, max_product,
    perturbed_speeds, Classification, LambdaInterval, PerturbedSpeeds, SpeedProfile,
    SIGN_TOLERANCE, SINGLETON_WIDTH,
};
pub use system::{eval_a, eval_b, DispersionSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DispersionError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("bracket failure: {0}")]
    BracketFailure(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("no critical mobility: kappa = {kappa} <= 1")]
    NoCriticalValue { kappa: f64 },
    #[error("critical mobility for general kernels is unproven; pass the unproven opt-in")]
    Unproven,
}

pub type Result<T, E = DispersionError> = std::result::Result<T, E>;
