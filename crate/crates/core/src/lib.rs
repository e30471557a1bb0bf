//! Shot-noise analysis for energy estimation on lattice Hamiltonians: Pauli algebra,
//! model builders, measurement partitionings, exact moments, improvement bounds,
//! perturbed-state ensembles and a shot-level measurement simulator.

pub mod error;
pub mod experiment;
pub mod lattice;
pub mod metrics;
pub mod partition;
pub mod pauli;
pub mod perturbed;
pub mod simulator;
pub mod spectral;

pub use error::{Error, Result};
