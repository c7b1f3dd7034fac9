//! Simulation of pulsed two-photon excitation of a quantum-dot biexciton
//! cascade and analysis of the resulting time-bin entangled photon pairs.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`] and [`state`]: small dense complex algebra and density-matrix types.
//! - [`dynamics`]: three-level Lindblad dynamics under a Gaussian drive with
//!   intensity-dependent dephasing, and photon emission probabilities.
//! - [`sweeps`]: Rabi scans, dephasing fits and biexciton/exciton ratio scans.
//! - [`timebin`]: the entangled-state noise model and entanglement metrics.
//! - [`tomography`]: 16-setting two-qubit tomography with linear and
//!   maximum-likelihood reconstruction.
//! - [`config`] and [`cli`]: the batch command-line front end.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod linalg;
pub mod state;
pub mod sweeps;
pub mod timebin;
pub mod tomography;

pub use num_complex;
