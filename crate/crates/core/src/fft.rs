//! Thin wrappers around rustfft with the crate's normalization convention.
//!
//! Forward transforms are unnormalized, inverse transforms divide by `n`,
//! so `inverse(forward(x)) == x`.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::FftPlanner;
use std::sync::{Arc, Mutex};

static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));

fn plan(n: usize, forward: bool) -> Arc<dyn rustfft::Fft<f64>> {
    let mut planner = PLANNER.lock().unwrap();
    if forward {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    }
}

/// In-place forward DFT.
pub fn forward(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
}

/// In-place inverse DFT, normalized by `1/n`.
pub fn inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    plan(n, false).process(buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Forward DFT of a real signal.
pub fn forward_real(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward(&mut buf);
    buf
}

/// The DFT grid frequency of bin `k`, mapped to `(-pi, pi]`.
///
/// Bins `0..=n/2` map to `[0, pi]`, the upper half to negative frequencies.
pub fn bin_frequency(k: usize, n: usize) -> f64 {
    debug_assert!(k < n);
    let two_pi = std::f64::consts::TAU;
    if k <= n / 2 {
        two_pi * k as f64 / n as f64
    } else {
        // computed as the exact negation of the mirror bin's frequency
        -(two_pi * (n - k) as f64 / n as f64)
    }
}

/// Index of the bin holding the mirror frequency `-omega_k` (mod n).
pub fn mirror_bin(k: usize, n: usize) -> usize {
    if k == 0 {
        0
    } else {
        n - k
    }
}
