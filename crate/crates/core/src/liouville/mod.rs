//! Lindblad generator, its spectrum, and spectral diagnostics.

mod classify;
mod commensurability;
mod eigen;
mod superop;

pub use classify::{classify, ModeClass, SpectrumReport, SpectrumTolerances};
pub(crate) use classify::cluster_values;
pub use commensurability::{commensurability, rational_approximation, CommensurabilityParams, CommensurabilityVerdict};
pub use eigen::{eigensystem, spectrum, Eigensystem, DEGENERACY_REL_TOL};
pub(crate) use eigen::hs_inner;
pub use superop::{build_liouvillian, unvectorize, vectorize, Liouvillian, MATERIALIZE_MAX_DIM};
