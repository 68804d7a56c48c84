//! Late-time discrete Fourier transforms and peak picking.
//!
//! Spectra are one-sided, `|X_k|` for `k = 0..=N/2`, unnormalized, on the
//! angular axis `ω_k = 2πk / (N Δt)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::series::TimeSeries;
use crate::error::{Error, Result};

/// Fewest samples left after the transient cut.
pub const MIN_DFT_SAMPLES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Blackman,
    Rectangular,
}

impl Window {
    pub fn as_str(self) -> &'static str {
        match self {
            Window::Blackman => "blackman",
            Window::Rectangular => "rectangular",
        }
    }

    /// Window weights for `n` samples.
    pub fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Blackman => {
                let m = (n - 1) as f64;
                (0..n)
                    .map(|k| {
                        let x = k as f64 / m;
                        0.42 - 0.5 * (2.0 * PI * x).cos() + 0.08 * (4.0 * PI * x).cos()
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DftSpectrum {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub window: Window,
    pub t_start: f64,
    /// Samples that entered the transform.
    pub n_samples: usize,
    pub dt: f64,
}

impl DftSpectrum {
    /// Spacing of the angular-frequency axis, `2π / (N Δt)`.
    pub fn bin_width(&self) -> f64 {
        2.0 * PI / (self.n_samples as f64 * self.dt)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitudes.iter().copied().fold(0.0, f64::max)
    }

    pub fn median_magnitude(&self) -> f64 {
        let mut m = self.magnitudes.clone();
        m.sort_by(f64::total_cmp);
        let k = m.len();
        if k % 2 == 1 {
            m[k / 2]
        } else {
            0.5 * (m[k / 2 - 1] + m[k / 2])
        }
    }
}

/// Unnormalized forward DFT `X_k = Σ_n x_n e^{−2πikn/N}`.
pub fn dft_raw(values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    if !buf.is_empty() {
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    }
    buf
}

/// Blackman-windowed spectrum of the samples at `t ≥ t_start`, mean removed.
pub fn dft_blackman(series: &TimeSeries, t_start: f64) -> Result<DftSpectrum> {
    windowed_dft(series, t_start, Window::Blackman)
}

/// Same as [`dft_blackman`] without the window.
pub fn dft_rectangular(series: &TimeSeries, t_start: f64) -> Result<DftSpectrum> {
    windowed_dft(series, t_start, Window::Rectangular)
}

fn windowed_dft(series: &TimeSeries, t_start: f64, window: Window) -> Result<DftSpectrum> {
    if !t_start.is_finite() {
        return Err(Error::Argument(format!("t_start must be finite, got {t_start}")));
    }
    let first = series.times.partition_point(|&t| t < t_start);
    let tail = &series.values[first..];
    let n = tail.len();
    if n < MIN_DFT_SAMPLES {
        return Err(Error::Argument(format!(
            "{n} samples at t >= {t_start}; the DFT needs at least {MIN_DFT_SAMPLES}"
        )));
    }
    let mean = tail.iter().sum::<f64>() / n as f64;
    let w = window.weights(n);
    let x: Vec<Complex64> = tail
        .iter()
        .zip(&w)
        .map(|(v, w)| Complex64::new((v - mean) * w, 0.0))
        .collect();
    let spectrum = dft_raw(&x);
    let dt = series.dt();
    let d_omega = 2.0 * PI / (n as f64 * dt);
    let half = n / 2;
    Ok(DftSpectrum {
        frequencies: (0..=half).map(|k| k as f64 * d_omega).collect(),
        magnitudes: spectrum[..=half].iter().map(|z| z.norm()).collect(),
        window,
        t_start,
        n_samples: n,
        dt,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub omega: f64,
    pub magnitude: f64,
}

/// Local maxima above `rel_threshold · max|X|`, refined by a parabola through
/// the three surrounding bins, in ascending frequency.
///
/// On noise-like spectra the count depends strongly on the threshold.
pub fn find_peaks(spec: &DftSpectrum, rel_threshold: f64) -> Result<Vec<Peak>> {
    if !(rel_threshold > 0.0 && rel_threshold < 1.0) {
        return Err(Error::Argument(format!("peak threshold must lie in (0, 1), got {rel_threshold}")));
    }
    let m = &spec.magnitudes;
    let k_max = m.len();
    let floor = rel_threshold * spec.max_magnitude();
    let dw = spec.bin_width();
    let mut peaks = Vec::new();
    for k in 0..k_max {
        let left = if k > 0 { m[k - 1] } else { f64::NEG_INFINITY };
        let right = if k + 1 < k_max { m[k + 1] } else { f64::NEG_INFINITY };
        if !(m[k] > left && m[k] >= right && m[k] > floor) {
            continue;
        }
        let mut peak = Peak {
            omega: spec.frequencies[k],
            magnitude: m[k],
        };
        if k > 0 && k + 1 < k_max {
            let denom = left - 2.0 * m[k] + right;
            if denom < 0.0 {
                let delta = 0.5 * (left - right) / denom;
                peak.omega += delta * dw;
                peak.magnitude -= 0.25 * (left - right) * delta;
            }
        }
        peaks.push(peak);
    }
    Ok(peaks)
}

/// Largest peak above the threshold, if any.
pub fn dominant_peak(spec: &DftSpectrum, rel_threshold: f64) -> Result<Option<Peak>> {
    Ok(find_peaks(spec, rel_threshold)?
        .into_iter()
        .max_by(|a, b| a.magnitude.total_cmp(&b.magnitude)))
}
