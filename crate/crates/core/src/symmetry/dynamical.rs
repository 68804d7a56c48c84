//! Strong dynamical symmetries and the mixed coherences they generate.

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liouville::{hs_inner, Liouvillian};
use crate::qspace::SparseOperator;

/// Default pass threshold for the relative residuals of a certificate.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Evidence that `A` does or does not satisfy `[H,A] = ωA`, `[L_μ,A] = [L_μ†,A] = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetryCertificate {
    #[serde(skip)]
    pub operator: SparseOperator,
    /// `Re⟨A,[H,A]⟩ / ⟨A,A⟩`.
    pub omega: f64,
    /// `‖[H,A] − ωA‖ / ‖A‖`.
    pub residual_h: f64,
    /// `max_μ max(‖[L_μ,A]‖, ‖[L_μ†,A]‖) / ‖A‖`.
    pub residual_l: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn verify_dynamical_symmetry(
    h: &SparseOperator,
    jumps: &[SparseOperator],
    a: &SparseOperator,
    tol: f64,
) -> Result<SymmetryCertificate> {
    if a.dim() != h.dim() {
        return Err(Error::Shape(format!("candidate of dim {} for a dim-{} Hamiltonian", a.dim(), h.dim())));
    }
    let a_norm = a.frobenius_norm();
    if a_norm == 0.0 {
        return Err(Error::Argument("candidate symmetry operator is zero".into()));
    }
    let ha = h.commutator(a)?;
    let omega = a.frobenius_inner(&ha)?.re / (a_norm * a_norm);
    let residual_h = ha.sub(&a.scale_real(omega))?.frobenius_norm() / a_norm;
    let mut residual_l: f64 = 0.0;
    for l in jumps {
        let c1 = l.commutator(a)?.frobenius_norm();
        let c2 = l.adjoint().commutator(a)?.frobenius_norm();
        residual_l = residual_l.max(c1.max(c2) / a_norm);
    }
    Ok(SymmetryCertificate {
        operator: a.clone(),
        omega,
        residual_h,
        residual_l,
        tol,
        pass: residual_h <= tol && residual_l <= tol,
    })
}

#[derive(Clone, Debug)]
pub struct MixedCoherence {
    pub n: usize,
    pub m: usize,
    /// `Aⁿ ρ∞ (A†)ᵐ`, unit Frobenius norm.
    pub state: Mat<Complex64>,
    /// `−i(n − m)ω`.
    pub lambda: Complex64,
    /// `‖𝓛[state] − λ·state‖_F`.
    pub residual: f64,
}

fn frobenius(m: &Mat<Complex64>) -> f64 {
    hs_inner(m, m).re.sqrt()
}

/// Stationarity threshold on `‖𝓛[ρ∞]‖_F / ‖ρ∞‖_F`.
const STATIONARY_TOL: f64 = 1e-8;

/// Products `Aⁿ ρ∞ (A†)ᵐ` for `n ≤ n_max`, `m ≤ m_max`.
///
/// If `A` is a strong dynamical symmetry with frequency `ω`, every nonzero
/// product is an eigenmatrix of `𝓛` with eigenvalue `−i(n − m)ω`. Vanishing
/// products are skipped; the others are normalized and checked against `𝓛`.
pub fn mixed_coherences(
    liouv: &Liouvillian,
    a: &SparseOperator,
    omega: f64,
    rho_ss: &Mat<Complex64>,
    n_max: usize,
    m_max: usize,
) -> Result<Vec<MixedCoherence>> {
    let dim = liouv.dim();
    if a.dim() != dim || rho_ss.nrows() != dim || rho_ss.ncols() != dim {
        return Err(Error::Shape(format!("operands do not match Liouvillian dim {dim}")));
    }
    let rho_norm = frobenius(rho_ss);
    let drift = frobenius(&liouv.apply(rho_ss)?);
    if rho_norm == 0.0 || drift > STATIONARY_TOL * rho_norm {
        return Err(Error::Precondition(format!(
            "supplied state is not stationary: ‖𝓛ρ‖/‖ρ‖ = {:.3e}",
            drift / rho_norm
        )));
    }
    // left[n] = Aⁿ ρ∞
    let mut left = vec![rho_ss.clone()];
    for k in 0..n_max {
        left.push(a.mul_dense(&left[k])?);
    }
    let mut out = Vec::new();
    for (n, ln) in left.iter().enumerate() {
        // X (A†)ᵐ = (Aᵐ X†)†
        let mut right = ln.adjoint().to_owned();
        for m in 0..=m_max {
            if m > 0 {
                right = a.mul_dense(&right)?;
            }
            let state = right.adjoint().to_owned();
            let norm = frobenius(&state);
            if norm <= 1e-12 * rho_norm {
                continue;
            }
            let state = state * faer::Scale(Complex64::new(1.0 / norm, 0.0));
            let lambda = Complex64::new(0.0, -((n as f64) - (m as f64)) * omega);
            let residual = frobenius(&(liouv.apply(&state)? - &state * faer::Scale(lambda)));
            out.push(MixedCoherence {
                n,
                m,
                state,
                lambda,
                residual,
            });
        }
    }
    Ok(out)
}
