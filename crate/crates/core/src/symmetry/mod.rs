//! Dark states, strong dynamical symmetries, and their persistent coherences.

mod dark;
mod dynamical;
mod ghz;

pub use dark::{find_dark_states, DarkState, DarkStateReport, DarkStateTolerances, DARK_STATE_MAX_DIM};
pub use dynamical::{mixed_coherences, verify_dynamical_symmetry, MixedCoherence, SymmetryCertificate, SYMMETRY_TOL};
pub use ghz::{ghz_effective, GhzEffective};
