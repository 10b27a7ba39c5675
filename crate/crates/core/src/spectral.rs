//! Cached FFT plans shared by the angular transforms.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::{Arc, Mutex, OnceLock};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

pub(crate) fn forward(n: usize) -> Arc<dyn Fft<f64>> {
    planner().lock().expect("fft planner poisoned").plan_fft_forward(n)
}

pub(crate) fn inverse(n: usize) -> Arc<dyn Fft<f64>> {
    planner().lock().expect("fft planner poisoned").plan_fft_inverse(n)
}

/// Signed wavenumber of DFT bin `m` for length `n`; the Nyquist bin maps to `n/2`.
#[inline]
pub(crate) fn wavenumber(m: usize, n: usize) -> f64 {
    if m <= n / 2 {
        m as f64
    } else {
        m as f64 - n as f64
    }
}

/// In-place angular derivative `∂/∂θ` of one ring of samples (spectral, Nyquist dropped).
pub(crate) fn ring_derivative(buf: &mut [Complex64], fwd: &dyn Fft<f64>, inv: &dyn Fft<f64>) {
    let n = buf.len();
    fwd.process(buf);
    let scale = 1.0 / n as f64;
    for (m, c) in buf.iter_mut().enumerate() {
        if 2 * m == n {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= Complex64::new(0.0, wavenumber(m, n) * scale);
        }
    }
    inv.process(buf);
}
