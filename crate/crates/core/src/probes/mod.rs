//! Transverse-spin and Loschmidt-echo probes and their late-time spectra.

mod dft;
mod series;

pub use dft::{
    dft_blackman, dft_raw, dft_rectangular, dominant_peak, find_peaks, DftSpectrum, Peak, Window, MIN_DFT_SAMPLES,
};
pub use series::{
    echo_value, loschmidt_echo_series, transverse_spin_series, ProbeRecorder, TimeSeries, UNIFORM_GRID_TOL,
};
