//! Shared FFT plans. rustfft planners cache plans per length; a single global
//! planner behind a mutex keeps plan reuse across the whole process while the
//! transforms themselves run lock-free on caller-owned buffers.

use std::sync::{LazyLock, Mutex};

use num_complex::Complex64;
use rustfft::FftPlanner;

static PLANNER: LazyLock<Mutex<FftPlanner<f64>>> =
    LazyLock::new(|| Mutex::new(FftPlanner::new()));

/// Unnormalized forward transform, in place: X[j] = sum_n x[n] exp(-2*pi*i*j*n/N).
pub(crate) fn forward(buf: &mut [Complex64]) {
    let plan = PLANNER.lock().unwrap().plan_fft_forward(buf.len());
    plan.process(buf);
}

/// Unnormalized inverse transform, in place: x[n] = sum_j X[j] exp(+2*pi*i*j*n/N).
pub(crate) fn inverse(buf: &mut [Complex64]) {
    let plan = PLANNER.lock().unwrap().plan_fft_inverse(buf.len());
    plan.process(buf);
}
