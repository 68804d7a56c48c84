#![allow(dead_code)]

use dtc::dynamics::{random_pure_state, pure_density};
use dtc::liouville::{build_liouvillian, Liouvillian};
use dtc::model::{Model, PresetOptions, ScenarioSpec, ScenarioTag};
use dtc::Complex64;
use faer::{Mat, Side};

pub fn model(tag: ScenarioTag, sites: usize, seed: u64) -> Model {
    model_with(tag, sites, seed, &PresetOptions::default())
}

pub fn model_with(tag: ScenarioTag, sites: usize, seed: u64, opts: &PresetOptions) -> Model {
    Model::build(&ScenarioSpec::preset(tag, sites, seed, opts).unwrap()).unwrap()
}

pub fn liouvillian(m: &Model) -> Liouvillian {
    build_liouvillian(&m.hamiltonian, &m.jumps).unwrap()
}

pub fn random_density(m: &Model, seed: u64) -> Mat<Complex64> {
    pure_density(&random_pure_state(&m.hamiltonian, seed).unwrap())
}

pub fn trace(rho: &Mat<Complex64>) -> Complex64 {
    (0..rho.nrows()).map(|i| rho[(i, i)]).sum()
}

pub fn min_eigenvalue(rho: &Mat<Complex64>) -> f64 {
    let herm = (rho + rho.adjoint()) * faer::Scale(Complex64::new(0.5, 0.0));
    herm.self_adjoint_eigenvalues(Side::Lower)
        .unwrap()
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a Hermitian sparse operator by dense diagonalization.
pub fn energies(h: &dtc::qspace::SparseOperator) -> Vec<f64> {
    h.to_dense().self_adjoint_eigenvalues(Side::Lower).unwrap()
}

/// Every element of `got` lies within `tol` of some element of `want`, and vice versa.
pub fn set_equal(got: &[f64], want: &[f64], tol: f64) -> bool {
    let covered = |xs: &[f64], ys: &[f64]| xs.iter().all(|x| ys.iter().any(|y| (x - y).abs() <= tol));
    covered(got, want) && covered(want, got)
}
