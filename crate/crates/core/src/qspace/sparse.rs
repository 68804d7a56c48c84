//! Compressed-row complex sparse matrices.
//!
//! Every Hamiltonian, jump operator and observable in the crate is a
//! [`SparseOperator`]. Entries whose modulus falls at or below
//! [`DROP_TOLERANCE`] are never stored.

use std::collections::BTreeMap;
use std::fmt;

use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute threshold below which entries are discarded.
pub const DROP_TOLERANCE: f64 = 1e-14;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Square complex sparse matrix in CSR layout with sorted column indices.
#[derive(Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl fmt::Debug for SparseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseOperator")
            .field("dim", &self.dim)
            .field("nnz", &self.nnz())
            .finish()
    }
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![Complex64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
            .expect("diagonal entries are always in range")
    }

    /// Builds an operator from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut rows: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); dim];
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::Shape(format!(
                    "entry ({r}, {c}) outside a {dim}x{dim} operator"
                )));
            }
            *rows[r].entry(c).or_insert(ZERO) += v;
        }
        let mut op = Self::zeros(dim);
        for (r, row) in rows.into_iter().enumerate() {
            for (c, v) in row {
                if v.norm() > DROP_TOLERANCE {
                    op.cols.push(c);
                    op.vals.push(v);
                }
            }
            op.row_ptr[r + 1] = op.cols.len();
        }
        Ok(op)
    }

    /// Converts a dense square matrix, dropping negligible entries.
    pub fn from_dense(m: &Mat<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Shape(format!(
                "dense matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let mut op = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                let v = m[(r, c)];
                if v.norm() > DROP_TOLERANCE {
                    op.cols.push(c);
                    op.vals.push(v);
                }
            }
            op.row_ptr[r + 1] = op.cols.len();
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries of row `r` as `(col, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// All stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        let mut m = Mat::<Complex64>::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    fn check_same_dim(&self, other: &Self, op: &str) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!(
                "{op}: dimensions {} and {} differ",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    fn combine(&self, other: &Self, a: Complex64, b: Complex64) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            let mut lhs = self.row(r).peekable();
            let mut rhs = other.row(r).peekable();
            loop {
                let (c, v) = match (lhs.peek(), rhs.peek()) {
                    (None, None) => break,
                    (Some(&(c, v)), None) => {
                        lhs.next();
                        (c, a * v)
                    }
                    (None, Some(&(c, w))) => {
                        rhs.next();
                        (c, b * w)
                    }
                    (Some(&(c, v)), Some(&(d, w))) => {
                        if c < d {
                            lhs.next();
                            (c, a * v)
                        } else if d < c {
                            rhs.next();
                            (d, b * w)
                        } else {
                            lhs.next();
                            rhs.next();
                            (c, a * v + b * w)
                        }
                    }
                };
                if v.norm() > DROP_TOLERANCE {
                    out.cols.push(c);
                    out.vals.push(v);
                }
            }
            out.row_ptr[r + 1] = out.cols.len();
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other, "add")?;
        Ok(self.combine(other, Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other, "sub")?;
        Ok(self.combine(other, Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)))
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.check_same_dim(other, "linear_combination")?;
        Ok(self.combine(other, a, b))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                let w = s * v;
                if w.norm() > DROP_TOLERANCE {
                    out.cols.push(c);
                    out.vals.push(w);
                }
            }
            out.row_ptr[r + 1] = out.cols.len();
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Matrix product `self * other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other, "multiply")?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        let mut acc = vec![ZERO; n];
        let mut touched = vec![false; n];
        let mut pattern: Vec<usize> = Vec::new();
        for r in 0..n {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        pattern.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            pattern.sort_unstable();
            for &c in &pattern {
                let v = acc[c];
                if v.norm() > DROP_TOLERANCE {
                    out.cols.push(c);
                    out.vals.push(v);
                }
                acc[c] = ZERO;
                touched[c] = false;
            }
            pattern.clear();
            out.row_ptr[r + 1] = out.cols.len();
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut counts = vec![0usize; n + 1];
        for &c in &self.cols {
            counts[c + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![ZERO; self.nnz()];
        for r in 0..n {
            for (c, v) in self.row(r) {
                let slot = next[c];
                cols[slot] = r;
                vals[slot] = v.conj();
                next[c] += 1;
            }
        }
        Self {
            dim: n,
            row_ptr,
            cols,
            vals,
        }
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.multiply(other)?.sub(&other.multiply(self)?)
    }

    /// `{A, B} = AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.multiply(other)?.add(&other.multiply(self)?)
    }

    /// Hilbert–Schmidt product `Tr(A† B)`.
    pub fn frobenius_inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_dim(other, "frobenius_inner")?;
        let mut acc = ZERO;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                acc += v.conj() * other.get(r, c);
            }
        }
        Ok(acc)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus; zero for the zero operator.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    /// `‖A − A†‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.adjoint()).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim {
            return Err(Error::Shape(format!(
                "vector of length {} applied to a {}-dimensional operator",
                x.len(),
                self.dim
            )));
        }
        let mut y = vec![ZERO; self.dim];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` without bounds validation beyond slice indexing.
    pub(crate) fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// `out[:, j] = A * m[:, j]` for every column of a dense matrix.
    pub(crate) fn mul_dense_into(&self, m: &Mat<Complex64>, out: &mut Mat<Complex64>) {
        for j in 0..m.ncols() {
            let x = m.col_as_slice(j);
            let y = out.col_as_slice_mut(j);
            self.apply_into(x, y);
        }
    }

    pub fn mul_dense(&self, m: &Mat<Complex64>) -> Result<Mat<Complex64>> {
        if m.nrows() != self.dim {
            return Err(Error::Shape(format!(
                "operator of dim {} times matrix with {} rows",
                self.dim,
                m.nrows()
            )));
        }
        let mut out = Mat::<Complex64>::zeros(self.dim, m.ncols());
        self.mul_dense_into(m, &mut out);
        Ok(out)
    }

    /// `⟨x|A|x⟩` for a (not necessarily normalized) vector.
    pub fn expectation(&self, x: &[Complex64]) -> Result<Complex64> {
        let ax = self.apply(x)?;
        Ok(x.iter().zip(&ax).map(|(a, b)| a.conj() * b).sum())
    }

    /// `Tr(A ρ)` against a dense matrix.
    pub fn trace_with(&self, rho: &Mat<Complex64>) -> Result<Complex64> {
        self.trace_with_ref(rho.as_ref())
    }

    pub fn trace_with_ref(&self, rho: MatRef<'_, Complex64>) -> Result<Complex64> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::Shape(format!(
                "trace of a {}-dim operator against a {}x{} matrix",
                self.dim,
                rho.nrows(),
                rho.ncols()
            )));
        }
        let mut acc = ZERO;
        for (r, c, v) in self.triplets() {
            acc += v * rho[(c, r)];
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dense_close(a: &Mat<Complex64>, b: &Mat<Complex64>, tol: f64) -> bool {
        (a - b).norm_max() <= tol
    }

    fn arb_operator(dim: usize) -> impl Strategy<Value = SparseOperator> {
        proptest::collection::vec((0..dim, 0..dim, -2.0f64..2.0, -2.0f64..2.0), 0..3 * dim)
            .prop_map(move |entries| {
                SparseOperator::from_triplets(
                    dim,
                    entries.into_iter().map(|(r, col, re, im)| (r, col, c(re, im))),
                )
                .unwrap()
            })
    }

    #[test]
    fn commutator_with_self_vanishes() {
        let a = SparseOperator::from_triplets(3, [(0, 1, c(1.0, 2.0)), (2, 0, c(-0.5, 0.0))]).unwrap();
        assert!(a.commutator(&a).unwrap().is_zero());
    }

    #[test]
    fn adjoint_is_involution() {
        let a = SparseOperator::from_triplets(4, [(0, 3, c(1.0, 2.0)), (1, 1, c(0.0, -1.0))]).unwrap();
        assert_eq!(a.adjoint().adjoint(), a);
        assert_eq!(a.adjoint().get(3, 0), c(1.0, -2.0));
    }

    #[test]
    fn identity_inner_product_is_dimension() {
        let id = SparseOperator::identity(4);
        assert_eq!(id.frobenius_inner(&id).unwrap(), c(4.0, 0.0));
    }

    #[test]
    fn duplicates_are_summed_and_cancellations_dropped() {
        let a = SparseOperator::from_triplets(
            2,
            [(0, 0, c(1.0, 0.0)), (0, 0, c(-1.0, 0.0)), (1, 0, c(0.5, 0.0)), (1, 0, c(0.5, 0.0))],
        )
        .unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(1, 0), c(1.0, 0.0));
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let a = SparseOperator::identity(2);
        let b = SparseOperator::identity(3);
        assert!(matches!(a.add(&b), Err(Error::Shape(_))));
        assert!(matches!(a.multiply(&b), Err(Error::Shape(_))));
        assert!(matches!(a.commutator(&b), Err(Error::Shape(_))));
        assert!(matches!(a.frobenius_inner(&b), Err(Error::Shape(_))));
        assert!(matches!(SparseOperator::from_triplets(2, [(2, 0, c(1.0, 0.0))]), Err(Error::Shape(_))));
    }

    #[test]
    fn tiny_entries_are_not_stored() {
        let a = SparseOperator::from_triplets(2, [(0, 1, c(1e-15, 0.0))]).unwrap();
        assert!(a.is_zero());
        let b = SparseOperator::identity(2).scale_real(1e-15);
        assert!(b.is_zero());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn product_matches_dense(a in arb_operator(8), b in arb_operator(8)) {
            let sparse = a.multiply(&b).unwrap().to_dense();
            let dense = a.to_dense() * b.to_dense();
            prop_assert!(dense_close(&sparse, &dense, 1e-12));
        }

        #[test]
        fn algebra_is_associative_and_distributive(
            a in arb_operator(16), b in arb_operator(16), d in arb_operator(16)
        ) {
            let left = a.multiply(&b).unwrap().multiply(&d).unwrap();
            let right = a.multiply(&b.multiply(&d).unwrap()).unwrap();
            prop_assert!(dense_close(&left.to_dense(), &right.to_dense(), 1e-10));

            let dist = a.multiply(&b.add(&d).unwrap()).unwrap();
            let expanded = a.multiply(&b).unwrap().add(&a.multiply(&d).unwrap()).unwrap();
            prop_assert!(dense_close(&dist.to_dense(), &expanded.to_dense(), 1e-10));

            let dense_oracle = a.to_dense() * (b.to_dense() + d.to_dense());
            prop_assert!(dense_close(&dist.to_dense(), &dense_oracle, 1e-10));
        }

        #[test]
        fn adjoint_and_inner_product_match_dense(a in arb_operator(12), b in arb_operator(12)) {
            let dense_adj = a.to_dense().adjoint().to_owned();
            prop_assert!(dense_close(&a.adjoint().to_dense(), &dense_adj, 0.0));
            let inner = a.frobenius_inner(&b).unwrap();
            let oracle = (a.to_dense().adjoint() * b.to_dense()).diagonal().column_vector().sum();
            prop_assert!((inner - oracle).norm() <= 1e-10);
        }

        #[test]
        fn dense_round_trip(a in arb_operator(10)) {
            prop_assert_eq!(SparseOperator::from_dense(&a.to_dense()).unwrap(), a);
        }
    }
}
