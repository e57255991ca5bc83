//! Discrete adiabatic quantum walks: walk operators, spectral tracking,
//! evolution diagnostics, Grover search and the toy models.

pub mod error;
pub mod evolution;
pub mod grover;
pub mod integrators;
pub mod linalg;
mod quad;
pub mod schedules;
pub mod spectral;
pub mod toymodels;

pub use error::{Error, Result};
