//! The Lindblad generator
//!
//! `𝓛ρ = −i[H,ρ] + Σ_μ (2 L_μ ρ L_μ† − L_μ†L_μ ρ − ρ L_μ†L_μ)`
//!
//! Note the factor 2 on the recycling term: with this convention the jump
//! operators carry rates as amplitudes and the effective decay rate of a
//! channel is twice `‖L_μ‖²`.
//!
//! Vectorization is column-stacking, `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`, so the
//! entry `ρ[r, c]` sits at position `c·N + r`.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qspace::SparseOperator;

/// Largest Fock dimension for which the `N² × N²` matrix is built.
pub const MATERIALIZE_MAX_DIM: usize = 64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug)]
pub struct Liouvillian {
    dim: usize,
    hamiltonian: SparseOperator,
    jumps: Vec<SparseOperator>,
    /// `H − i Σ L†L`.
    h_eff: SparseOperator,
    /// Per jump, the stored entries as `(row, col, value)`.
    jump_entries: Vec<Vec<(usize, usize, Complex64)>>,
    /// Conjugated diagonal of `H_eff`.
    eff_diag_conj: Vec<Complex64>,
    /// Off-diagonal part of `H_eff` by row, as `(col, conj(value))`.
    eff_off: Vec<Vec<(usize, Complex64)>>,
    /// True when every off-diagonal entry of `H_eff` is real.
    eff_off_real: bool,
}

/// Tile edge for the blocked transpose in the Hermitian kernel.
const TILE: usize = 32;

pub fn build_liouvillian(h: &SparseOperator, jumps: &[SparseOperator]) -> Result<Liouvillian> {
    Liouvillian::new(h, jumps)
}

impl Liouvillian {
    pub fn new(h: &SparseOperator, jumps: &[SparseOperator]) -> Result<Self> {
        let dim = h.dim();
        let mut decay = SparseOperator::zeros(dim);
        for (k, l) in jumps.iter().enumerate() {
            if l.dim() != dim {
                return Err(Error::Shape(format!(
                    "jump operator {k} has dim {}, Hamiltonian has {dim}",
                    l.dim()
                )));
            }
            decay = decay.add(&l.adjoint().multiply(l)?)?;
        }
        let h_eff = h.linear_combination(Complex64::new(1.0, 0.0), &decay, -I)?;
        let eff_diag_conj = (0..dim).map(|i| h_eff.get(i, i).conj()).collect();
        let eff_off: Vec<Vec<(usize, Complex64)>> = (0..dim)
            .map(|r| h_eff.row(r).filter(|&(c, _)| c != r).map(|(c, v)| (c, v.conj())).collect())
            .collect();
        let eff_off_real = eff_off.iter().flatten().all(|(_, v)| v.im == 0.0);
        Ok(Self {
            dim,
            hamiltonian: h.clone(),
            jumps: jumps.to_vec(),
            h_eff,
            jump_entries: jumps.iter().map(|l| l.triplets().collect()).collect(),
            eff_diag_conj,
            eff_off,
            eff_off_real,
        })
    }

    /// Fock-space dimension `N`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Superoperator dimension `N²`.
    pub fn superdim(&self) -> usize {
        self.dim * self.dim
    }

    pub fn hamiltonian(&self) -> &SparseOperator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[SparseOperator] {
        &self.jumps
    }

    /// Non-Hermitian effective Hamiltonian `H − i Σ_μ L_μ†L_μ`.
    pub fn effective_hamiltonian(&self) -> &SparseOperator {
        &self.h_eff
    }

    fn check(&self, rho: &Mat<Complex64>) -> Result<()> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::Shape(format!(
                "{}x{} matrix for a Liouvillian on dim {}",
                rho.nrows(),
                rho.ncols(),
                self.dim
            )));
        }
        Ok(())
    }

    /// `𝓛[ρ]` for an arbitrary (not necessarily Hermitian) `N × N` matrix.
    pub fn apply(&self, rho: &Mat<Complex64>) -> Result<Mat<Complex64>> {
        self.check(rho)?;
        let n = self.dim;
        let flat: Vec<Complex64> = (0..n).flat_map(|c| rho.col_as_slice(c).iter().copied()).collect();
        let mut out = vec![ZERO; n * n];
        self.apply_slice(&flat, &mut out);
        Ok(Mat::from_fn(n, n, |r, c| out[c * n + r]))
    }

    /// Matrix-free kernel on column-major `N²` buffers; `out` is overwritten.
    pub(crate) fn apply_slice(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        debug_assert!(rho.len() == n * n && out.len() == n * n);
        for j in 0..n {
            let x = &rho[j * n..(j + 1) * n];
            let y = &mut out[j * n..(j + 1) * n];
            // −i H_eff ρ
            for (r, slot) in y.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (c, v) in self.h_eff.row(r) {
                    acc += v * x[c];
                }
                *slot = Complex64::new(acc.im, -acc.re);
            }
            // + i ρ H_eff†: column j is Σ_k conj(H_eff[j,k]) ρ[:,k].
            for (k, v) in self.h_eff.row(j) {
                let w = I * v.conj();
                let src = &rho[k * n..(k + 1) * n];
                for (o, s) in y.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
        // + 2 L ρ L†, summed over stored-entry pairs.
        for entries in &self.jump_entries {
            for &(b, d, lb) in entries {
                let lbc = 2.0 * lb.conj();
                for &(a, c, la) in entries {
                    out[b * n + a] += la * lbc * rho[d * n + c];
                }
            }
        }
    }

    /// Kernel for Hermitian `ρ`: with `Y = ρ H_eff†`, the generator reads
    /// `𝓛ρ = iY + (iY)† + 2 Σ_μ L_μ ρ L_μ†`. The output is exactly Hermitian;
    /// for non-Hermitian input the result is not `𝓛ρ`. `scratch` holds `Y`.
    pub(crate) fn apply_hermitian_slice(&self, rho: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = self.dim;
        debug_assert!(rho.len() == n * n && out.len() == n * n && scratch.len() == n * n);
        for j in 0..n {
            let y = &mut scratch[j * n..(j + 1) * n];
            let d = self.eff_diag_conj[j];
            for (o, s) in y.iter_mut().zip(&rho[j * n..(j + 1) * n]) {
                *o = d * s;
            }
            if self.eff_off_real {
                let yf: &mut [f64] = bytemuck::cast_slice_mut(y);
                for &(k, v) in &self.eff_off[j] {
                    let src: &[f64] = bytemuck::cast_slice(&rho[k * n..(k + 1) * n]);
                    let w = v.re;
                    for (o, s) in yf.iter_mut().zip(src) {
                        *o += w * s;
                    }
                }
            } else {
                for &(k, w) in &self.eff_off[j] {
                    for (o, s) in y.iter_mut().zip(&rho[k * n..(k + 1) * n]) {
                        *o += w * s;
                    }
                }
            }
        }
        // out[r,c] = i (Y[r,c] − conj(Y[c,r])), tile by tile.
        for cb in (0..n).step_by(TILE) {
            for rb in (0..n).step_by(TILE) {
                for c in cb..(cb + TILE).min(n) {
                    for r in rb..(rb + TILE).min(n) {
                        let z = scratch[c * n + r] - scratch[r * n + c].conj();
                        out[c * n + r] = Complex64::new(-z.im, z.re);
                    }
                }
            }
        }
        for entries in &self.jump_entries {
            for &(b, d, lb) in entries {
                let lbc = 2.0 * lb.conj();
                for &(a, c, la) in entries {
                    out[b * n + a] += la * lbc * rho[d * n + c];
                }
            }
        }
    }

    /// Adjoint generator `𝓛†[σ] = i[H,σ] + Σ_μ (2 L_μ† σ L_μ − L_μ†L_μ σ − σ L_μ†L_μ)`.
    pub fn apply_adjoint(&self, sigma: &Mat<Complex64>) -> Result<Mat<Complex64>> {
        self.check(sigma)?;
        let n = self.dim;
        // i H_eff† σ − i σ H_eff reproduces the Hamiltonian and anticommutator parts.
        let h_eff_adj = self.h_eff.adjoint();
        let mut out = h_eff_adj.mul_dense(sigma)?;
        for v in out.col_iter_mut() {
            for z in v.iter_mut() {
                *z *= I;
            }
        }
        let sigma_adj = sigma.adjoint().to_owned();
        // σ H_eff = (H_eff† σ†)†
        let t = h_eff_adj.mul_dense(&sigma_adj)?;
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] -= I * t[(c, r)].conj();
            }
        }
        for l in &self.jumps {
            let ld = l.adjoint();
            // L† σ L = ((L† σ†) ... computed densely through two sparse products.
            let left = ld.mul_dense(sigma)?;
            let left_adj = left.adjoint().to_owned();
            let t = ld.mul_dense(&left_adj)?; // L† (L†σ)† = L† σ† L
            for r in 0..n {
                for c in 0..n {
                    // (L† σ† L)† = L† σ L
                    out[(r, c)] += 2.0 * t[(c, r)].conj();
                }
            }
        }
        Ok(out)
    }

    /// Dense `N² × N²` superoperator; only for `N ≤ MATERIALIZE_MAX_DIM`.
    pub fn matrix(&self) -> Result<Mat<Complex64>> {
        let n = self.dim;
        if n > MATERIALIZE_MAX_DIM {
            return Err(Error::Size(format!(
                "materializing a Liouvillian needs Fock dim <= {MATERIALIZE_MAX_DIM} (at most 3 sites), got {n}"
            )));
        }
        let nn = n * n;
        let mut m = Mat::<Complex64>::zeros(nn, nn);
        for (r, c, v) in self.h_eff.triplets() {
            let lhs = -I * v;
            let rhs = I * v.conj();
            for k in 0..n {
                // I ⊗ H_eff
                m[(k * n + r, k * n + c)] += lhs;
                // conj(H_eff) ⊗ I
                m[(r * n + k, c * n + k)] += rhs;
            }
        }
        for entries in &self.jump_entries {
            for &(r1, c1, v1) in entries {
                let w = 2.0 * v1.conj();
                for &(r2, c2, v2) in entries {
                    m[(r1 * n + r2, c1 * n + c2)] += w * v2;
                }
            }
        }
        Ok(m)
    }
}

/// Column-stacked vectorization.
pub fn vectorize(rho: &Mat<Complex64>) -> Vec<Complex64> {
    (0..rho.ncols())
        .flat_map(|c| rho.col_as_slice(c).iter().copied())
        .collect()
}

/// Inverse of [`vectorize`] for a square matrix.
pub fn unvectorize(v: &[Complex64]) -> Result<Mat<Complex64>> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() {
        return Err(Error::Shape(format!("vector of length {} is not a square matrix", v.len())));
    }
    Ok(Mat::from_fn(n, n, |r, c| v[c * n + r]))
}
