//! Occupation-number basis for spin-1/2 fermions on an open chain.
//!
//! Modes are ordered site-major with spin up before spin down:
//! `(1,↑), (1,↓), (2,↑), …`. Mode `m` occupies bit `m` of the basis index,
//! so the index *is* the occupation bitstring read least-significant first.
//! Creation and annihilation operators carry the Jordan–Wigner sign
//! `(-1)^(number of occupied modes before m)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sparse::SparseOperator;
use crate::error::{Error, Result};

/// Largest supported chain length; `4^6 = 4096` states.
pub const MAX_SITES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    fn offset(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// Occupation of a single site.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalState {
    Empty,
    Up,
    Down,
    Double,
}

impl LocalState {
    fn bits(self) -> usize {
        match self {
            LocalState::Empty => 0b00,
            LocalState::Up => 0b01,
            LocalState::Down => 0b10,
            LocalState::Double => 0b11,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockBasis {
    sites: usize,
    dim: usize,
}

/// Builds the `4^L`-dimensional basis, rejecting `L = 0` and `L > MAX_SITES`.
pub fn build_basis(sites: usize) -> Result<FockBasis> {
    FockBasis::new(sites)
}

impl FockBasis {
    pub fn new(sites: usize) -> Result<Self> {
        if sites == 0 || sites > MAX_SITES {
            return Err(Error::Size(format!(
                "chain length {sites} outside 1..={MAX_SITES} (largest basis is 4^{MAX_SITES} = 4096 states)"
            )));
        }
        Ok(Self {
            sites,
            dim: 1 << (2 * sites),
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        2 * self.sites
    }

    /// Mode index of `(site, spin)` with 1-based sites.
    pub fn mode(&self, site: usize, spin: Spin) -> Result<usize> {
        if site == 0 || site > self.sites {
            return Err(Error::Index(format!(
                "site {site} outside 1..={}",
                self.sites
            )));
        }
        Ok(2 * (site - 1) + spin.offset())
    }

    /// Occupation bitstring of a basis index, one `'0'`/`'1'` per mode in mode order.
    pub fn bitstring(&self, index: usize) -> String {
        (0..self.modes())
            .map(|m| if index >> m & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Inverse of [`FockBasis::bitstring`].
    pub fn index_of(&self, bits: &str) -> Result<usize> {
        if bits.len() != self.modes() {
            return Err(Error::Argument(format!(
                "bitstring of length {} for {} modes",
                bits.len(),
                self.modes()
            )));
        }
        bits.chars().enumerate().try_fold(0usize, |acc, (m, ch)| match ch {
            '0' => Ok(acc),
            '1' => Ok(acc | 1 << m),
            other => Err(Error::Argument(format!("invalid occupation character {other:?}"))),
        })
    }

    /// Basis index of a product state given one local state per site.
    pub fn product_state(&self, locals: &[LocalState]) -> Result<usize> {
        if locals.len() != self.sites {
            return Err(Error::Argument(format!(
                "{} local states for {} sites",
                locals.len(),
                self.sites
            )));
        }
        Ok(locals
            .iter()
            .enumerate()
            .fold(0, |acc, (j, s)| acc | s.bits() << (2 * j)))
    }

    /// Index of the state with every site singly occupied by `spin`.
    pub fn polarized(&self, spin: Spin) -> usize {
        let local = match spin {
            Spin::Up => LocalState::Up,
            Spin::Down => LocalState::Down,
        };
        self.product_state(&vec![local; self.sites])
            .expect("length matches by construction")
    }

    /// Unit vector for a basis index.
    pub fn basis_vector(&self, index: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim];
        v[index] = Complex64::new(1.0, 0.0);
        v
    }

    /// Jordan–Wigner annihilator `c_{site,spin}`.
    pub fn annihilator(&self, site: usize, spin: Spin) -> Result<SparseOperator> {
        let m = self.mode(site, spin)?;
        let below = (1usize << m) - 1;
        let entries = (0..self.dim).filter(|s| s >> m & 1 == 1).map(|s| {
            let sign = if (s & below).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            (s ^ 1 << m, s, Complex64::new(sign, 0.0))
        });
        SparseOperator::from_triplets(self.dim, entries)
    }

    /// `c†_{site,spin}`.
    pub fn creator(&self, site: usize, spin: Spin) -> Result<SparseOperator> {
        Ok(self.annihilator(site, spin)?.adjoint())
    }

    /// `n_{site,spin} = c† c`, diagonal in the occupation basis.
    pub fn number(&self, site: usize, spin: Spin) -> Result<SparseOperator> {
        let m = self.mode(site, spin)?;
        let entries = (0..self.dim)
            .filter(|s| s >> m & 1 == 1)
            .map(|s| (s, s, Complex64::new(1.0, 0.0)));
        SparseOperator::from_triplets(self.dim, entries)
    }

    /// `(n_↑, n_↓, n)` on one site.
    pub fn number_ops(&self, site: usize) -> Result<NumberOps> {
        let up = self.number(site, Spin::Up)?;
        let down = self.number(site, Spin::Down)?;
        let total = up.add(&down)?;
        Ok(NumberOps { up, down, total })
    }
}

/// Per-site occupation operators.
#[derive(Clone, Debug)]
pub struct NumberOps {
    pub up: SparseOperator,
    pub down: SparseOperator,
    pub total: SparseOperator,
}
