//! Dormand–Prince 5(4) with adaptive steps.
//!
//! Steps are shortened to land exactly on each requested sample time. The
//! error norm is the scaled RMS norm
//! `sqrt(mean((e_i / (atol + rtol·max(|y_i|, |ŷ_i|)))²))` over real components.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Steps shorter than this abort the integration.
    pub h_min: f64,
    pub max_steps: u64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            h_min: 1e-12,
            max_steps: 100_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.h_min > 0.0 && self.max_steps > 0) {
            return Err(Error::Config(format!("invalid integrator options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct IntegrationStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evaluations: u64,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Integrates the autonomous real system `y' = f(y)` from `t0` through the
/// ascending `samples` (all `≥ t0`). Complex systems pass their buffers
/// reinterpreted as interleaved `(re, im)` pairs.
///
/// At every sample the state and its derivative pass through `project`
/// (which must commute with `f`, e.g. Hermitization for a Lindblad
/// generator) before `observe(index, t, y)` is called.
pub fn integrate<F, P, O>(
    mut f: F,
    y: &mut [f64],
    t0: f64,
    samples: &[f64],
    opts: &IntegratorOptions,
    project: P,
    mut observe: O,
) -> Result<IntegrationStats>
where
    F: FnMut(&[f64], &mut [f64]),
    P: Fn(&mut [f64]),
    O: FnMut(usize, f64, &[f64]) -> Result<()>,
{
    opts.validate()?;
    if samples.windows(2).any(|w| !(w[1] >= w[0])) || samples.first().is_some_and(|&s| s < t0) {
        return Err(Error::Argument("sample times must be ascending and not before t0".into()));
    }
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut stats = IntegrationStats::default();

    f(y, &mut k1);
    stats.rhs_evaluations += 1;

    let mut t = t0;
    let mut h = initial_step(y, &k1, opts, samples.last().map_or(1.0, |&s| s - t0));

    for (index, &target) in samples.iter().enumerate() {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::Integration(format!(
                    "step budget of {} exhausted at t = {t}",
                    opts.max_steps
                )));
            }
            let remaining = target - t;
            let last = h >= remaining;
            let hs = if last { remaining } else { h };

            for i in 0..n {
                stage[i] = y[i] + hs * (A21 * k1[i]);
            }
            f(&stage, &mut k2);
            for i in 0..n {
                stage[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            f(&stage, &mut k3);
            for i in 0..n {
                stage[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(&stage, &mut k4);
            for i in 0..n {
                stage[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(&stage, &mut k5);
            for i in 0..n {
                stage[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            f(&stage, &mut k6);
            for i in 0..n {
                y_new[i] = y[i] + hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            f(&y_new, &mut k7);
            stats.rhs_evaluations += 6;

            let mut acc = 0.0;
            for i in 0..n {
                let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                let q = e / sc;
                acc += q * q;
            }
            let err = (acc / n.max(1) as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Integration(format!("non-finite error estimate at t = {t}, h = {hs:e}")));
            }
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            if err <= 1.0 {
                stats.accepted += 1;
                t = if last { target } else { t + hs };
                y.copy_from_slice(&y_new);
                std::mem::swap(&mut k1, &mut k7);
                // A clipped final step says little about the natural step size.
                h = if last { h.max(hs * fac) } else { hs * fac };
            } else {
                stats.rejected += 1;
                h = hs * fac.min(1.0);
            }
            if h < opts.h_min {
                return Err(Error::Integration(format!(
                    "step size underflow at t = {t}: h = {h:e} < h_min = {:e} (error ratio {err:e})",
                    opts.h_min
                )));
            }
        }
        project(y);
        project(&mut k1);
        observe(index, t, y)?;
    }
    Ok(stats)
}

/// Hairer's starting-step heuristic, first part.
fn initial_step(y: &[f64], dy: &[f64], opts: &IntegratorOptions, span: f64) -> f64 {
    let n = y.len().max(1) as f64;
    let (mut d0, mut d1) = (0.0, 0.0);
    for (a, b) in y.iter().zip(dy) {
        let sc = opts.atol + opts.rtol * a.abs();
        d0 += (a / sc).powi(2);
        d1 += (b / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span.max(opts.h_min)).max(opts.h_min)
}
