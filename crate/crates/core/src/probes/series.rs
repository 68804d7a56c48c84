//! Observable and Loschmidt-echo time series.

use faer::{Mat, MatRef};
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::DensityTrajectory;
use crate::error::{Error, Result};
use crate::model::SpinOperators;
use crate::qspace::SparseOperator;

/// Relative tolerance on the spacing of a [`TimeSeries`] grid.
pub const UNIFORM_GRID_TOL: f64 = 1e-12;

/// Real samples on a uniform time grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest imaginary part discarded when the samples were taken.
    pub max_imag: f64,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::with_imag(times, values, 0.0)
    }

    /// Keeps the real parts of `values` and records the largest imaginary part.
    pub fn from_complex(times: Vec<f64>, values: &[Complex64]) -> Result<Self> {
        let max_imag = values.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        Self::with_imag(times, values.iter().map(|z| z.re).collect(), max_imag)
    }

    fn with_imag(times: Vec<f64>, values: Vec<f64>, max_imag: f64) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Shape(format!("{} times for {} values", times.len(), values.len())));
        }
        if times.len() < 2 {
            return Err(Error::Argument(format!("a time series needs at least 2 samples, got {}", times.len())));
        }
        let n = times.len();
        let (t0, t1) = (times[0], times[n - 1]);
        let dt = (t1 - t0) / (n - 1) as f64;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Argument(format!("time grid [{t0}, {t1}] is not increasing")));
        }
        let tol = UNIFORM_GRID_TOL * t0.abs().max(t1.abs()).max(dt);
        if let Some((i, t)) = times.iter().enumerate().find(|&(i, t)| (t - (t0 + i as f64 * dt)).abs() > tol) {
            return Err(Error::Argument(format!("sample {i} at t = {t} is off the uniform grid with step {dt}")));
        }
        Ok(Self { times, values, max_imag })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dt(&self) -> f64 {
        (self.times[self.len() - 1] - self.times[0]) / (self.len() - 1) as f64
    }
}

/// `Tr(ρ₀† ρ)`.
pub fn echo_value(rho0: MatRef<'_, Complex64>, rho: MatRef<'_, Complex64>) -> Result<Complex64> {
    if rho0.nrows() != rho.nrows() || rho0.ncols() != rho.ncols() {
        return Err(Error::Shape(format!(
            "echo of a {}x{} reference against a {}x{} state",
            rho0.nrows(),
            rho0.ncols(),
            rho.nrows(),
            rho.ncols()
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for c in 0..rho.ncols() {
        for r in 0..rho.nrows() {
            acc += rho0[(r, c)].conj() * rho[(r, c)];
        }
    }
    Ok(acc)
}

/// Collects observables and the echo while a master equation is integrated,
/// so nothing but the running state has to be kept in memory.
///
/// ```ignore
/// let mut rec = ProbeRecorder::new(vec![sx.clone()], Some(rho0.clone()));
/// evolve_master_with(&liouv, &rho0, &grid, &opts, |i, t, rho| rec.record(i, t, rho))?;
/// let spin = rec.observable_series(0)?;
/// ```
#[derive(Clone, Debug)]
pub struct ProbeRecorder {
    observables: Vec<SparseOperator>,
    reference: Option<Mat<Complex64>>,
    times: Vec<f64>,
    values: Vec<Vec<Complex64>>,
    echo: Vec<Complex64>,
}

impl ProbeRecorder {
    pub fn new(observables: Vec<SparseOperator>, echo_reference: Option<Mat<Complex64>>) -> Self {
        let values = vec![Vec::new(); observables.len()];
        Self {
            observables,
            reference: echo_reference,
            times: Vec::new(),
            values,
            echo: Vec::new(),
        }
    }

    pub fn record(&mut self, index: usize, t: f64, rho: MatRef<'_, Complex64>) -> Result<()> {
        if index != self.times.len() {
            return Err(Error::Argument(format!("sample {index} recorded out of order")));
        }
        self.times.push(t);
        for (o, series) in self.observables.iter().zip(&mut self.values) {
            series.push(o.trace_with_ref(rho)?);
        }
        if let Some(r) = &self.reference {
            self.echo.push(echo_value(r.as_ref(), rho)?);
        }
        Ok(())
    }

    pub fn observable_series(&self, k: usize) -> Result<TimeSeries> {
        let v = self
            .values
            .get(k)
            .ok_or_else(|| Error::Index(format!("observable {k} of {}", self.values.len())))?;
        TimeSeries::from_complex(self.times.clone(), v)
    }

    /// `None` when no echo reference was given.
    pub fn echo_series(&self) -> Option<Result<TimeSeries>> {
        self.reference
            .as_ref()
            .map(|_| TimeSeries::from_complex(self.times.clone(), &self.echo))
    }
}

/// `⟨S^x_site⟩(t_i)` along a stored trajectory (sites are 1-based).
pub fn transverse_spin_series(traj: &DensityTrajectory, spins: &SpinOperators, site: usize) -> Result<TimeSeries> {
    let sx = spins.s_x(site)?;
    let values = traj
        .states
        .iter()
        .map(|rho| sx.trace_with(rho))
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::from_complex(traj.grid.times(), &values)
}

/// Loschmidt echo `Tr(ρ₀† ρ(t_i))` along a stored trajectory.
pub fn loschmidt_echo_series(rho0: &Mat<Complex64>, traj: &DensityTrajectory) -> Result<TimeSeries> {
    let values = traj
        .states
        .iter()
        .map(|rho| echo_value(rho0.as_ref(), rho.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::from_complex(traj.grid.times(), &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_master, evolve_master_with, pure_density, IntegratorOptions, TimeGrid};
    use crate::liouville::build_liouvillian;
    use crate::model::{Model, PresetOptions, ScenarioSpec, ScenarioTag};
    use crate::qspace::Spin;

    fn model(tag: ScenarioTag, sites: usize) -> Model {
        Model::build(&ScenarioSpec::preset(tag, sites, 4, &PresetOptions::default()).unwrap()).unwrap()
    }

    fn plus_state(m: &Model) -> Vec<Complex64> {
        let mut psi = vec![Complex64::new(0.0, 0.0); m.basis.dim()];
        let a = std::f64::consts::FRAC_1_SQRT_2;
        psi[m.basis.polarized(Spin::Up)] = Complex64::new(a, 0.0);
        psi[m.basis.polarized(Spin::Down)] = Complex64::new(a, 0.0);
        psi
    }

    #[test]
    fn grid_checks() {
        assert!(TimeSeries::new(vec![0.0, 1.0, 2.0], vec![0.0; 2]).is_err());
        assert!(TimeSeries::new(vec![0.0], vec![0.0]).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0, 2.5], vec![0.0; 3]).is_err());
        assert!(TimeSeries::new(vec![1.0, 0.0], vec![0.0; 2]).is_err());
        let g = TimeGrid::new(0.0, 1000.0, 16384).unwrap();
        let s = TimeSeries::new(g.times(), vec![0.0; 16384]).unwrap();
        assert!((s.dt() - g.dt()).abs() < 1e-15);
    }

    #[test]
    fn down_state_has_no_transverse_spin() {
        let m = model(ScenarioTag::LossGain, 2);
        let l = build_liouvillian(&m.hamiltonian, &m.jumps).unwrap();
        let rho = pure_density(&m.basis.basis_vector(m.basis.polarized(Spin::Down)));
        let grid = TimeGrid::new(0.0, 2.0, 9).unwrap();
        let traj = evolve_master(&l, &rho, &grid, &IntegratorOptions::default()).unwrap();
        for site in 1..=2 {
            let s = transverse_spin_series(&traj, &m.spins, site).unwrap();
            assert!(s.values.iter().all(|v| v.abs() < 1e-12));
        }
        assert!(matches!(transverse_spin_series(&traj, &m.spins, 3), Err(Error::Index(_))));
    }

    #[test]
    fn closed_single_site_echo_is_periodic() {
        // ρ(t) keeps |ψ(t)⟩ = (e^{−iBt/2}|↑⟩ + e^{iBt/2}|↓⟩)/√2, so Tr(ρ₀ρ(t)) = cos²(Bt/2).
        let m = model(ScenarioTag::Closed, 1);
        let b = m.spec.params.field[0];
        let l = build_liouvillian(&m.hamiltonian, &m.jumps).unwrap();
        let rho0 = pure_density(&plus_state(&m));
        let grid = TimeGrid::new(0.0, 4.0 * std::f64::consts::PI / b, 81).unwrap();
        let traj = evolve_master(&l, &rho0, &grid, &IntegratorOptions::default()).unwrap();
        let echo = loschmidt_echo_series(&rho0, &traj).unwrap();
        let spin = transverse_spin_series(&traj, &m.spins, 1).unwrap();
        assert!((echo.values[0] - 1.0).abs() < 1e-14);
        assert!((spin.values[0] - 0.5).abs() < 1e-14);
        for (t, v) in echo.times.iter().zip(&echo.values) {
            assert!((v - (0.5 * b * t).cos().powi(2)).abs() < 1e-8, "t={t}");
        }
        assert!((echo.values[40] - 1.0).abs() < 1e-8);
        assert!(echo.max_imag < 1e-10 && spin.max_imag < 1e-10);
    }

    #[test]
    fn recorder_matches_stored_trajectory() {
        let m = model(ScenarioTag::LossGain, 2);
        let l = build_liouvillian(&m.hamiltonian, &m.jumps).unwrap();
        let psi = crate::dynamics::random_pure_state(&m.hamiltonian, 11).unwrap();
        let rho0 = pure_density(&psi);
        let grid = TimeGrid::new(0.0, 3.0, 31).unwrap();
        let opts = IntegratorOptions::default();
        let traj = evolve_master(&l, &rho0, &grid, &opts).unwrap();
        let sx = m.spins.s_x(2).unwrap().clone();
        let mut rec = ProbeRecorder::new(vec![sx], Some(rho0.clone()));
        evolve_master_with(&l, &rho0, &grid, &opts, |i, t, rho| rec.record(i, t, rho)).unwrap();
        assert_eq!(rec.observable_series(0).unwrap(), transverse_spin_series(&traj, &m.spins, 2).unwrap());
        assert_eq!(rec.echo_series().unwrap().unwrap(), loschmidt_echo_series(&rho0, &traj).unwrap());
        assert!(rec.observable_series(1).is_err());
        assert!(ProbeRecorder::new(vec![], None).echo_series().is_none());
    }

    #[test]
    fn echo_shape_mismatch() {
        let a = Mat::<Complex64>::zeros(2, 2);
        let b = Mat::<Complex64>::zeros(3, 3);
        assert!(matches!(echo_value(a.as_ref(), b.as_ref()), Err(Error::Shape(_))));
    }
}
