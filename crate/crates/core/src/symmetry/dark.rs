//! Dark states: joint eigenvectors of `H` annihilated by every jump operator.

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qspace::SparseOperator;

/// Largest Fock dimension accepted by [`find_dark_states`].
pub const DARK_STATE_MAX_DIM: usize = 256;

/// A filtered eigenvector counts as new when less than `1 − tol` of its
/// weight lies in the span of the states already found.
const FILTER_OVERLAP_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DarkStateTolerances {
    /// Singular values below `kernel · σ_max` span the common kernel.
    pub kernel: f64,
    /// `‖(I − P) H P‖ ≤ invariance · ‖H‖` counts as an invariant subspace.
    pub invariance: f64,
}

impl Default for DarkStateTolerances {
    fn default() -> Self {
        Self {
            kernel: 1e-10,
            invariance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DarkState {
    pub energy: f64,
    #[serde(skip)]
    pub vector: Vec<Complex64>,
    /// `max_μ ‖L_μ |φ⟩‖`.
    pub jump_residual: f64,
    /// `‖H|φ⟩ − E|φ⟩‖`.
    pub energy_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DarkStateReport {
    /// Dimension of the common kernel of the jump operators.
    pub kernel_dim: usize,
    /// `‖(I − P) H P‖ / ‖H‖` on the raw kernel.
    pub invariance_residual: f64,
    /// Whether `H` maps the raw kernel into itself.
    pub kernel_invariant: bool,
    /// Dimension of the largest `H`-invariant subspace inside the kernel.
    pub invariant_dim: usize,
    /// Set when the raw kernel was not invariant and had to be reduced.
    pub warning: Option<String>,
    /// Eigenvectors of the full `H` with jump residual below the kernel
    /// cutoff; only computed when the raw kernel is not invariant.
    pub eigenvector_filter: Option<usize>,
    /// States found by the eigenvector filter but missing from the invariant subspace.
    pub filter_added: usize,
    /// Sorted by energy.
    pub states: Vec<DarkState>,
}

impl DarkStateReport {
    /// Distinct nonzero `E_n − E_m` over all pairs, clustered at `tol`.
    pub fn energy_differences(&self, tol: f64) -> Vec<f64> {
        let mut diffs = Vec::new();
        for a in &self.states {
            for b in &self.states {
                let d = a.energy - b.energy;
                if d.abs() > tol {
                    diffs.push(d);
                }
            }
        }
        crate::liouville::cluster_values(&diffs, tol)
    }
}

fn spectral_norm(m: &Mat<Complex64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let sv = m
        .singular_values()
        .map_err(|e| Error::Numerical(format!("singular values: {e:?}")))?;
    Ok(sv.first().copied().unwrap_or(0.0))
}

/// Columns of `V` spanning the right null space of `m`, with singular values
/// at or below `cutoff`. `m` may have fewer rows than columns.
fn null_space(m: &Mat<Complex64>, cutoff: f64) -> Result<Mat<Complex64>> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if cols == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let svd = m.svd().map_err(|e| Error::Numerical(format!("SVD: {e:?}")))?;
    let s = svd.S().column_vector();
    let rank = (0..rows.min(cols)).filter(|&i| s[i].re > cutoff).count();
    let v = svd.V();
    Ok(Mat::from_fn(cols, cols - rank, |i, k| v[(i, rank + k)]))
}

/// Leakage `(I − QQ†) H Q` of an orthonormal basis `Q` under `H`.
fn leakage(h: &Mat<Complex64>, q: &Mat<Complex64>) -> Mat<Complex64> {
    let hq = h * q;
    let proj = q * (q.adjoint() * &hq);
    hq - proj
}

/// Finds the joint eigenvectors of `H` annihilated by all `jumps`.
///
/// The common kernel of the jumps comes from an SVD of the stacked jump
/// matrices. If `H` does not map that kernel into itself, it is shrunk to its
/// largest `H`-invariant subspace by repeatedly discarding leaking directions,
/// and the report carries a warning. In that case the eigenvectors of the full
/// `H` are also screened for small jump residuals, which catches dark states
/// the reduction loses to near-degeneracies; the reduction in turn catches
/// dark states hidden inside degenerate eigenspaces of `H`.
pub fn find_dark_states(
    h: &SparseOperator,
    jumps: &[SparseOperator],
    tol: &DarkStateTolerances,
) -> Result<DarkStateReport> {
    let n = h.dim();
    if n > DARK_STATE_MAX_DIM {
        return Err(Error::Size(format!(
            "dark-state search needs Fock dim <= {DARK_STATE_MAX_DIM} (at most 4 sites), got {n}"
        )));
    }
    if let Some(l) = jumps.iter().find(|l| l.dim() != n) {
        return Err(Error::Shape(format!("jump operator of dim {} for a dim-{n} Hamiltonian", l.dim())));
    }
    let hd = h.to_dense();
    let h_norm = spectral_norm(&hd)?.max(f64::MIN_POSITIVE);

    let mut jump_scale = 0.0;
    let kernel = if jumps.is_empty() {
        Mat::<Complex64>::identity(n, n)
    } else {
        let mut stacked = Mat::<Complex64>::zeros(n * jumps.len(), n);
        for (k, l) in jumps.iter().enumerate() {
            for (r, c, v) in l.triplets() {
                stacked[(k * n + r, c)] = v;
            }
        }
        jump_scale = spectral_norm(&stacked)?;
        null_space(&stacked, tol.kernel * jump_scale)?
    };
    let kernel_dim = kernel.ncols();
    let invariance_residual = if kernel_dim == 0 {
        0.0
    } else {
        spectral_norm(&leakage(&hd, &kernel))? / h_norm
    };
    let kernel_invariant = invariance_residual <= tol.invariance;

    let mut q = kernel;
    if !kernel_invariant {
        loop {
            if q.ncols() == 0 {
                break;
            }
            let leak = leakage(&hd, &q);
            if spectral_norm(&leak)? <= tol.invariance * h_norm {
                break;
            }
            let keep = null_space(&leak, tol.invariance * h_norm)?;
            if keep.ncols() == q.ncols() {
                break;
            }
            q = &q * keep;
        }
    }
    let invariant_dim = q.ncols();
    let warning = (!kernel_invariant).then(|| {
        format!(
            "Hamiltonian does not preserve the {kernel_dim}-dimensional jump kernel \
             (relative leakage {invariance_residual:.3e}); dark states taken from its \
             {invariant_dim}-dimensional invariant subspace"
        )
    });

    let mut states = Vec::with_capacity(invariant_dim);
    if invariant_dim > 0 {
        let restricted = q.adjoint() * &hd * &q;
        // Symmetrize against roundoff before the Hermitian solver.
        let restricted = (&restricted + restricted.adjoint()) * faer::Scale(Complex64::new(0.5, 0.0));
        let eig = restricted
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("restricted Hamiltonian: {e:?}")))?;
        let u = &q * eig.U();
        for k in 0..invariant_dim {
            let vector: Vec<Complex64> = u.col(k).iter().copied().collect();
            states.push(dark_state(h, jumps, vector, eig.S()[k].re)?);
        }
    }

    // Second route: filter the eigenvectors of the full H by their jump residual.
    let mut eigenvector_filter = None;
    let mut filter_added = 0;
    if !kernel_invariant {
        let hs = (&hd + hd.adjoint()) * faer::Scale(Complex64::new(0.5, 0.0));
        let eig = hs
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("Hamiltonian: {e:?}")))?;
        let mut passed = 0;
        for k in 0..n {
            let vector: Vec<Complex64> = eig.U().col(k).iter().copied().collect();
            let candidate = dark_state(h, jumps, vector, eig.S()[k].re)?;
            if candidate.jump_residual > tol.kernel * jump_scale {
                continue;
            }
            passed += 1;
            let covered: f64 = states
                .iter()
                .map(|s| inner(&s.vector, &candidate.vector).norm_sqr())
                .sum();
            if covered < 1.0 - FILTER_OVERLAP_TOL {
                states.push(candidate);
                filter_added += 1;
            }
        }
        eigenvector_filter = Some(passed);
        states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    }

    Ok(DarkStateReport {
        kernel_dim,
        invariance_residual,
        kernel_invariant,
        invariant_dim,
        warning,
        eigenvector_filter,
        filter_added,
        states,
    })
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn dark_state(h: &SparseOperator, jumps: &[SparseOperator], vector: Vec<Complex64>, energy: f64) -> Result<DarkState> {
    let hv = h.apply(&vector)?;
    let energy_residual = hv
        .iter()
        .zip(&vector)
        .map(|(a, b)| (a - b * energy).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let mut jump_residual: f64 = 0.0;
    for l in jumps {
        let lv = l.apply(&vector)?;
        jump_residual = jump_residual.max(lv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    }
    Ok(DarkState {
        energy,
        vector,
        jump_residual,
        energy_residual,
    })
}
