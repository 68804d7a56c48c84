//! Quantum-jump unraveling of the master equation.
//!
//! With the factor-2 dissipator `Σ_μ 2 L_μ ρ L_μ†`, the jump channels are
//! `C_μ = √2 L_μ` and the no-jump drift is `H_nh = H − i Σ_μ L_μ†L_μ`, so that
//! `Σ_μ C_μ†C_μ / 2 = Σ_μ L_μ†L_μ` matches the anticommutator term.
//!
//! Between jumps the unnormalized state follows `ψ' = −i H_nh ψ` with fixed
//! RK4 substeps of at most `max_substep`, landing on every grid point. A jump
//! fires when `‖ψ‖²` drops to a uniform threshold `r`; its time is located by
//! bisection inside the substep, and the channel is drawn with probability
//! `∝ ‖C_μ ψ‖²`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::initial::norm;
use super::master::{flush_tiny, TimeGrid};
use crate::error::{Error, Result};
use crate::qspace::SparseOperator;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryOptions {
    pub max_substep: f64,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self { max_substep: 1e-3 }
    }
}

/// Largest number of stored amplitudes (`M · n_samples · N`) in a [`TrajectoryEnsemble`].
pub const MAX_STORED_AMPLITUDES: usize = 1 << 26;

const BISECTION_STEPS: usize = 48;

#[derive(Clone, Debug)]
pub struct TrajectoryEnsemble {
    pub grid: TimeGrid,
    pub rng_seed: u64,
    /// `pure_states[k][i]` is trajectory `k` at grid point `i`, normalized.
    pub pure_states: Vec<Vec<Vec<Complex64>>>,
    pub jump_counts: Vec<usize>,
}

impl TrajectoryEnsemble {
    pub fn count(&self) -> usize {
        self.pure_states.len()
    }

    /// `Re⟨ψ_k(t_i)|O|ψ_k(t_i)⟩` for every trajectory `k` and grid point `i`.
    pub fn expectations(&self, observable: &SparseOperator) -> Result<Vec<Vec<f64>>> {
        self.pure_states
            .iter()
            .map(|traj| {
                traj.iter()
                    .map(|psi| observable.expectation(psi).map(|z| z.re))
                    .collect()
            })
            .collect()
    }
}

/// Expectation series recorded on the fly, without storing states.
#[derive(Clone, Debug)]
pub struct ObservedEnsemble {
    pub grid: TimeGrid,
    pub rng_seed: u64,
    /// `values[k][o][i]`: trajectory `k`, observable `o`, grid point `i`.
    pub values: Vec<Vec<Vec<f64>>>,
    pub jump_counts: Vec<usize>,
}

impl ObservedEnsemble {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    /// Series of observable `o` for every trajectory.
    pub fn series(&self, o: usize) -> Vec<Vec<f64>> {
        self.values.iter().map(|v| v[o].clone()).collect()
    }
}

/// Mean and standard error across trajectories at each grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSeries {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    /// `None` for a single trajectory, where the spread is undefined.
    pub stderr: Option<Vec<f64>>,
}

/// Pointwise mean and standard error over equally long series.
pub fn mean_and_stderr(grid: &TimeGrid, series: &[Vec<f64>]) -> Result<EnsembleSeries> {
    let m = series.len();
    if m == 0 {
        return Err(Error::Argument("no trajectories to average".into()));
    }
    let len = grid.n_samples;
    if series.iter().any(|s| s.len() != len) {
        return Err(Error::Shape("trajectory series lengths differ from the grid".into()));
    }
    let mean: Vec<f64> = (0..len).map(|i| series.iter().map(|s| s[i]).sum::<f64>() / m as f64).collect();
    let stderr = (m > 1).then(|| {
        (0..len)
            .map(|i| {
                let var = series.iter().map(|s| (s[i] - mean[i]).powi(2)).sum::<f64>() / (m - 1) as f64;
                (var / m as f64).sqrt()
            })
            .collect()
    });
    Ok(EnsembleSeries {
        times: grid.times(),
        mean,
        stderr,
    })
}

/// Ensemble mean of `⟨ψ|O|ψ⟩` with its standard error.
pub fn ensemble_average(ens: &TrajectoryEnsemble, observable: &SparseOperator) -> Result<EnsembleSeries> {
    let dim = ens.pure_states.first().and_then(|t| t.first()).map_or(0, |p| p.len());
    if observable.dim() != dim {
        return Err(Error::Shape(format!("observable of dim {} for states of dim {dim}", observable.dim())));
    }
    mean_and_stderr(&ens.grid, &ens.expectations(observable)?)
}

struct Unraveling {
    /// `−i H_nh`.
    drift: SparseOperator,
    channels: Vec<SparseOperator>,
    max_substep: f64,
}

impl Unraveling {
    fn new(h: &SparseOperator, jumps: &[SparseOperator], opts: &TrajectoryOptions) -> Result<Self> {
        let n = h.dim();
        if let Some(l) = jumps.iter().find(|l| l.dim() != n) {
            return Err(Error::Shape(format!("jump operator of dim {} for a dim-{n} Hamiltonian", l.dim())));
        }
        if !(opts.max_substep > 0.0 && opts.max_substep.is_finite()) {
            return Err(Error::Config(format!("max_substep must be positive, got {}", opts.max_substep)));
        }
        let mut decay = SparseOperator::zeros(n);
        for l in jumps {
            decay = decay.add(&l.adjoint().multiply(l)?)?;
        }
        let drift = h.linear_combination(Complex64::new(0.0, -1.0), &decay, Complex64::new(-1.0, 0.0))?;
        Ok(Self {
            drift,
            channels: jumps.iter().map(|l| l.scale_real(std::f64::consts::SQRT_2)).collect(),
            max_substep: opts.max_substep,
        })
    }
}

struct Rk4Buffers {
    k: [Vec<Complex64>; 4],
    stage: Vec<Complex64>,
}

impl Rk4Buffers {
    fn new(n: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n];
        Self {
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            stage: z,
        }
    }

    /// One classical RK4 step of size `h` from `psi` into `out`.
    fn step(&mut self, drift: &SparseOperator, psi: &[Complex64], h: f64, out: &mut [Complex64]) {
        let [k1, k2, k3, k4] = &mut self.k;
        drift.apply_into(psi, k1);
        for ((s, p), k) in self.stage.iter_mut().zip(psi).zip(k1.iter()) {
            *s = p + k * (0.5 * h);
        }
        drift.apply_into(&self.stage, k2);
        for ((s, p), k) in self.stage.iter_mut().zip(psi).zip(k2.iter()) {
            *s = p + k * (0.5 * h);
        }
        drift.apply_into(&self.stage, k3);
        for ((s, p), k) in self.stage.iter_mut().zip(psi).zip(k3.iter()) {
            *s = p + k * h;
        }
        drift.apply_into(&self.stage, k4);
        for i in 0..psi.len() {
            out[i] = psi[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

fn norm_sqr(psi: &[Complex64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum()
}

/// Runs one trajectory and hands each normalized sample to `record`; returns the jump count.
fn run_one<R: FnMut(usize, &[Complex64])>(
    u: &Unraveling,
    psi0: &[Complex64],
    grid: &TimeGrid,
    rng: &mut ChaCha20Rng,
    mut record: R,
) -> usize {
    let n = psi0.len();
    let mut buf = Rk4Buffers::new(n);
    let mut psi = psi0.to_vec();
    let mut trial = vec![Complex64::new(0.0, 0.0); n];
    let mut normalized = vec![Complex64::new(0.0, 0.0); n];
    let mut jumps = 0;
    let mut threshold: f64 = rng.random();
    let mut t = grid.t0;
    let open = !u.channels.is_empty();

    let mut emit = |i: usize, psi: &[Complex64], normalized: &mut [Complex64]| {
        let nrm = norm(psi);
        for (o, p) in normalized.iter_mut().zip(psi) {
            *o = p / nrm;
        }
        record(i, normalized);
    };
    emit(0, &psi, &mut normalized);

    for i in 1..grid.n_samples {
        let target = grid.time(i);
        while t < target {
            let h = u.max_substep.min(target - t);
            buf.step(&u.drift, &psi, h, &mut trial);
            if !open || norm_sqr(&trial) > threshold {
                std::mem::swap(&mut psi, &mut trial);
                t = if h == target - t { target } else { t + h };
                continue;
            }
            // The norm crosses the threshold inside this substep: bisect for the jump time.
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                buf.step(&u.drift, &psi, mid, &mut trial);
                if norm_sqr(&trial) > threshold {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            buf.step(&u.drift, &psi, hi, &mut trial);
            std::mem::swap(&mut psi, &mut trial);
            t = if hi == target - t { target } else { t + hi };

            let candidates: Vec<Vec<Complex64>> = u
                .channels
                .iter()
                .map(|c| c.apply(&psi).expect("dimensions checked at construction"))
                .collect();
            let weights: Vec<f64> = candidates.iter().map(|v| norm_sqr(v)).collect();
            let total: f64 = weights.iter().sum();
            if total > 0.0 {
                let mut pick = rng.random::<f64>() * total;
                let mut chosen = weights.len() - 1;
                for (k, w) in weights.iter().enumerate() {
                    if pick < *w {
                        chosen = k;
                        break;
                    }
                    pick -= w;
                }
                let nrm = weights[chosen].sqrt();
                psi = candidates[chosen].iter().map(|z| z / nrm).collect();
                jumps += 1;
            } else {
                let nrm = norm(&psi);
                psi.iter_mut().for_each(|z| *z /= nrm);
            }
            threshold = rng.random();
        }
        flush_tiny(&mut psi);
        emit(i, &psi, &mut normalized);
    }
    jumps
}

fn prepare(
    h: &SparseOperator,
    jumps: &[SparseOperator],
    psi0: &[Complex64],
    grid: &TimeGrid,
    m: usize,
    opts: &TrajectoryOptions,
) -> Result<Unraveling> {
    grid.validate()?;
    if m == 0 {
        return Err(Error::Argument("trajectory count must be at least 1".into()));
    }
    if psi0.len() != h.dim() {
        return Err(Error::Shape(format!("initial state of length {} on dim {}", psi0.len(), h.dim())));
    }
    if (norm(psi0) - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!("initial state has norm {}", norm(psi0))));
    }
    Unraveling::new(h, jumps, opts)
}

/// Independent stream per trajectory: the same `(seed, index)` always gives the same history.
fn stream(seed: u64, index: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs `m` trajectories from `psi0` and stores every sampled state.
pub fn evolve_trajectories(
    h: &SparseOperator,
    jumps: &[SparseOperator],
    psi0: &[Complex64],
    grid: &TimeGrid,
    m: usize,
    seed: u64,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryEnsemble> {
    let u = prepare(h, jumps, psi0, grid, m, opts)?;
    if m.saturating_mul(grid.n_samples).saturating_mul(psi0.len()) > MAX_STORED_AMPLITUDES {
        return Err(Error::Size(format!(
            "{m} trajectories x {} samples x dim {} exceeds {MAX_STORED_AMPLITUDES} stored amplitudes; \
             use evolve_trajectories_observed",
            grid.n_samples,
            psi0.len()
        )));
    }
    let runs: Vec<(Vec<Vec<Complex64>>, usize)> = (0..m)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k);
            let mut states = Vec::with_capacity(grid.n_samples);
            let count = run_one(&u, psi0, grid, &mut rng, |_, psi| states.push(psi.to_vec()));
            (states, count)
        })
        .collect();
    let (pure_states, jump_counts) = runs.into_iter().unzip();
    Ok(TrajectoryEnsemble {
        grid: *grid,
        rng_seed: seed,
        pure_states,
        jump_counts,
    })
}

/// Runs `m` trajectories and records `Re⟨ψ|O|ψ⟩` for each observable at every grid point.
#[allow(clippy::too_many_arguments)]
pub fn evolve_trajectories_observed(
    h: &SparseOperator,
    jumps: &[SparseOperator],
    psi0: &[Complex64],
    grid: &TimeGrid,
    m: usize,
    seed: u64,
    opts: &TrajectoryOptions,
    observables: &[SparseOperator],
) -> Result<ObservedEnsemble> {
    let u = prepare(h, jumps, psi0, grid, m, opts)?;
    if let Some(o) = observables.iter().find(|o| o.dim() != h.dim()) {
        return Err(Error::Shape(format!("observable of dim {} on dim {}", o.dim(), h.dim())));
    }
    let runs: Vec<(Vec<Vec<f64>>, usize)> = (0..m)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k);
            let mut values = vec![vec![0.0; grid.n_samples]; observables.len()];
            let count = run_one(&u, psi0, grid, &mut rng, |i, psi| {
                for (series, o) in values.iter_mut().zip(observables) {
                    series[i] = o.expectation(psi).expect("dimensions checked").re;
                }
            });
            (values, count)
        })
        .collect();
    let (values, jump_counts) = runs.into_iter().unzip();
    Ok(ObservedEnsemble {
        grid: *grid,
        rng_seed: seed,
        values,
        jump_counts,
    })
}
