//! Two-level effective model on the polarized dark states.

use num_complex::Complex64;

use crate::error::Result;
use crate::model::HubbardParams;
use crate::qspace::{FockBasis, SparseOperator, Spin};

#[derive(Clone, Debug)]
pub struct GhzEffective {
    /// `(𝓑/2)(|↑…↑⟩⟨↑…↑| − |↓…↓⟩⟨↓…↓|)` on the full Fock space.
    pub hamiltonian: SparseOperator,
    /// `(|↑…↑⟩ + |↓…↓⟩)/√2`.
    pub ghz_plus: Vec<Complex64>,
    /// `(|↑…↑⟩ − |↓…↓⟩)/√2`.
    pub ghz_minus: Vec<Complex64>,
    /// `𝓑 = Σ_j B_j`.
    pub frequency: f64,
}

pub fn ghz_effective(params: &HubbardParams) -> Result<GhzEffective> {
    params.validate()?;
    let basis = FockBasis::new(params.sites)?;
    let (up, down) = (basis.polarized(Spin::Up), basis.polarized(Spin::Down));
    let frequency = params.total_field();
    let hamiltonian = SparseOperator::from_triplets(
        basis.dim(),
        [
            (up, up, Complex64::new(frequency / 2.0, 0.0)),
            (down, down, Complex64::new(-frequency / 2.0, 0.0)),
        ],
    )?;
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let mut ghz_plus = vec![Complex64::new(0.0, 0.0); basis.dim()];
    let mut ghz_minus = ghz_plus.clone();
    ghz_plus[up] = Complex64::new(amp, 0.0);
    ghz_plus[down] = Complex64::new(amp, 0.0);
    ghz_minus[up] = Complex64::new(amp, 0.0);
    ghz_minus[down] = Complex64::new(-amp, 0.0);
    Ok(GhzEffective {
        hamiltonian,
        ghz_plus,
        ghz_minus,
        frequency,
    })
}
