//! Disordered Hubbard Hamiltonian, dissipator sets and spin observables.

mod operators;
mod scenario;

pub use operators::{
    build_hamiltonian, build_jump_operators, eta_minus, eta_plus, spin_operators, spin_raise, Model,
    SpinOperators,
};
pub use scenario::{
    DephasingOperator, Dissipator, FieldProfile, HubbardParams, PresetOptions, ScenarioSpec,
    ScenarioTag, DEFAULT_DEPHASING, DEFAULT_FIELD, DEFAULT_FIELD_WIDTH, DISORDER_MAX,
};
