//! Disordered Hubbard chains with two-body loss and gain, Liouvillian
//! spectral analysis, dark states, strong dynamical symmetries, and
//! master-equation / quantum-trajectory dynamics with spectral probes.
//!
//! Energies are measured in units of the hopping amplitude, which is fixed to 1.

pub mod dynamics;
pub mod error;
pub mod liouville;
pub mod model;
pub mod probes;
pub mod qspace;
pub mod symmetry;

pub use error::{Error, Result};
pub use num_complex::Complex64;
