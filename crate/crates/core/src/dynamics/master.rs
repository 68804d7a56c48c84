//! Deterministic master-equation evolution.

use faer::{Mat, MatRef};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dopri::{integrate, IntegrationStats, IntegratorOptions};
use crate::error::{Error, Result};
use crate::liouville::Liouvillian;

/// Uniform sampling grid `t0, t0 + Δt, …, t1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub n_samples: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, n_samples: usize) -> Result<Self> {
        let g = Self { t0, t1, n_samples };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t0 >= 0.0 && self.t1 > self.t0) {
            return Err(Error::Config(format!("time grid needs 0 <= t0 < t1, got [{}, {}]", self.t0, self.t1)));
        }
        if self.n_samples < 2 {
            return Err(Error::Config(format!("time grid needs at least 2 samples, got {}", self.n_samples)));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / (self.n_samples - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.n_samples {
            self.t1
        } else {
            self.t0 + i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|i| self.time(i)).collect()
    }
}

/// Sampled solution of the master equation.
#[derive(Clone, Debug)]
pub struct DensityTrajectory {
    pub grid: TimeGrid,
    pub states: Vec<Mat<Complex64>>,
    pub stats: IntegrationStats,
}

/// Largest number of stored complex entries (`n_samples · N²`) for [`evolve_master`].
pub const MAX_STORED_ENTRIES: usize = 1 << 26;

/// Entries below this are zeroed at each sample. Decaying coherences would
/// otherwise drift into the subnormal range, where arithmetic is very slow.
const FLUSH_BELOW: f64 = 1e-250;

pub(crate) fn flush_tiny(y: &mut [Complex64]) {
    for z in y.iter_mut() {
        if z.re.abs() < FLUSH_BELOW {
            z.re = 0.0;
        }
        if z.im.abs() < FLUSH_BELOW {
            z.im = 0.0;
        }
    }
}

/// Column-major `ρ ← (ρ + ρ†)/2`, with tiny entries flushed to zero.
pub(crate) fn hermitize(y: &mut [Complex64], n: usize) {
    flush_tiny(y);
    for c in 0..n {
        y[c * n + c].im = 0.0;
        for r in 0..c {
            let avg = (y[c * n + r] + y[r * n + c].conj()) * 0.5;
            y[c * n + r] = avg;
            y[r * n + c] = avg.conj();
        }
    }
}

fn check_state(rho0: &Mat<Complex64>, n: usize) -> Result<()> {
    if rho0.nrows() != n || rho0.ncols() != n {
        return Err(Error::Shape(format!("{}x{} initial state on dim {n}", rho0.nrows(), rho0.ncols())));
    }
    let defect = (rho0 - rho0.adjoint()).norm_max();
    let trace: Complex64 = (0..n).map(|i| rho0[(i, i)]).sum();
    if defect > 1e-10 || (trace - 1.0).norm() > 1e-10 {
        return Err(Error::Precondition(format!(
            "initial state must be Hermitian with unit trace (Hermiticity defect {defect:.2e}, trace {trace})"
        )));
    }
    Ok(())
}

/// Integrates `dρ/dt = 𝓛[ρ]` and calls `observe(i, t_i, ρ(t_i))` at each grid point.
///
/// Nothing is stored, so long grids on large Fock spaces cost only a few
/// state-sized buffers.
pub fn evolve_master_with<O>(
    liouv: &Liouvillian,
    rho0: &Mat<Complex64>,
    grid: &TimeGrid,
    opts: &IntegratorOptions,
    mut observe: O,
) -> Result<IntegrationStats>
where
    O: FnMut(usize, f64, MatRef<'_, Complex64>) -> Result<()>,
{
    grid.validate()?;
    let n = liouv.dim();
    check_state(rho0, n)?;
    let mut y: Vec<Complex64> = (0..n).flat_map(|c| rho0.col_as_slice(c).iter().copied()).collect();
    let mut scratch = vec![Complex64::new(0.0, 0.0); n * n];
    integrate(
        |r, out| liouv.apply_hermitian_slice(bytemuck::cast_slice(r), bytemuck::cast_slice_mut(out), &mut scratch),
        bytemuck::cast_slice_mut(&mut y),
        grid.t0,
        &grid.times(),
        opts,
        |buf| hermitize(bytemuck::cast_slice_mut(buf), n),
        |i, t, buf| observe(i, t, MatRef::from_column_major_slice(bytemuck::cast_slice(buf), n, n)),
    )
}

/// Integrates the master equation and keeps every sampled state.
pub fn evolve_master(
    liouv: &Liouvillian,
    rho0: &Mat<Complex64>,
    grid: &TimeGrid,
    opts: &IntegratorOptions,
) -> Result<DensityTrajectory> {
    let n = liouv.dim();
    if grid.n_samples.saturating_mul(n * n) > MAX_STORED_ENTRIES {
        return Err(Error::Size(format!(
            "storing {} samples of a {n}x{n} state exceeds {MAX_STORED_ENTRIES} entries; \
             use evolve_master_with and record observables instead",
            grid.n_samples
        )));
    }
    let mut states = Vec::with_capacity(grid.n_samples);
    let stats = evolve_master_with(liouv, rho0, grid, opts, |_, _, rho| {
        states.push(rho.to_owned());
        Ok(())
    })?;
    Ok(DensityTrajectory {
        grid: *grid,
        states,
        stats,
    })
}

/// `|ψ⟩⟨ψ|`.
pub fn pure_density(psi: &[Complex64]) -> Mat<Complex64> {
    Mat::from_fn(psi.len(), psi.len(), |r, c| psi[r] * psi[c].conj())
}
