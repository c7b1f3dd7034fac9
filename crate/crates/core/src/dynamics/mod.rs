//! Master-equation dynamics of the biexciton cascade under pulsed two-photon
//! excitation.

mod evolve;
pub mod integrator;
mod model;
mod trajectory;

use thiserror::Error;

pub use evolve::{
    emission_after_pulse, emission_probabilities, evolve, evolve_with, EmissionProbabilities,
    EvolveOptions, PulseEmission,
};
pub use integrator::IntegrationError;
pub use model::{
    build_hamiltonian, gaussian_area_factor, lindblad_rhs, ConstantDrive, DecayRates,
    DephasingModel, Drive, PulseDrive,
};
pub use trajectory::Trajectory;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integration failed: {0}")]
    Integration(#[from] IntegrationError),
    #[error("invariant violated at t = {t} ps: {detail}")]
    InvariantViolation { t: f64, detail: String },
    #[error("time {t} ps outside trajectory range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
}
