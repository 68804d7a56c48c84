//! Random initial states.

use faer::Side;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qspace::SparseOperator;

/// Largest Fock dimension for which the Hamiltonian is diagonalized.
pub const RANDOM_STATE_MAX_DIM: usize = 256;

/// `|ψ⟩ ∝ Σ_n u_n |φ_n⟩` with `u_n ~ U[0,1)` i.i.d. and `|φ_n⟩` the eigenvectors
/// of `h` in ascending energy order.
pub fn random_pure_state(h: &SparseOperator, seed: u64) -> Result<Vec<Complex64>> {
    let n = h.dim();
    if n > RANDOM_STATE_MAX_DIM {
        return Err(Error::Size(format!(
            "random eigenbasis states need Fock dim <= {RANDOM_STATE_MAX_DIM} (at most 4 sites), got {n}; \
             a Haar-random state is available instead"
        )));
    }
    let eig = h
        .to_dense()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hamiltonian eigendecomposition: {e:?}")))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let basis = eig.U();
    let mut psi: Vec<Complex64> = (0..n)
        .map(|r| (0..n).map(|k| basis[(r, k)] * u[k]).sum())
        .collect();
    normalize(&mut psi)?;
    Ok(psi)
}

/// Haar-random pure state from i.i.d. complex Gaussian amplitudes.
pub fn haar_random_state(dim: usize, seed: u64) -> Result<Vec<Complex64>> {
    if dim == 0 {
        return Err(Error::Argument("state dimension must be positive".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut psi: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    normalize(&mut psi)?;
    Ok(psi)
}

pub(crate) fn norm(psi: &[Complex64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(psi: &mut [Complex64]) -> Result<()> {
    let nrm = norm(psi);
    if !(nrm > 0.0 && nrm.is_finite()) {
        return Err(Error::Numerical("random state has zero norm".into()));
    }
    psi.iter_mut().for_each(|z| *z /= nrm);
    Ok(())
}
