//! Bilayer spatially-coupled LDPC codes for the two-user multiple-access
//! relay channel with binary erasure links and correlated sources.

pub mod code_sampler;
pub mod density_evolution;
pub mod ensemble;
pub mod error;
pub mod gf2;
pub mod rate_design;
pub mod rng;
pub mod simulator;
pub mod sparse;
pub mod theory;

pub use error::{DeError, DesignError, EnsembleError, MatrixError, SimError, TheoryError};
