//! Fock space and fermionic operator algebra.

mod basis;
mod sparse;

pub use basis::{build_basis, FockBasis, LocalState, NumberOps, Spin, MAX_SITES};
pub use sparse::{SparseOperator, DROP_TOLERANCE};
