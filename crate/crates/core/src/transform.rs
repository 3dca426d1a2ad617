//! FFT-based wavelet transform primitives: analysis, complex modulus and
//! low-pass averaging.
//!
//! All convolutions are circular (pure frequency-domain products), so every
//! operator here is exactly translation-covariant. Analysis multiplies by
//! the conjugated atom spectrum, i.e. row `j` of [`cwt`] holds
//! `<x, psi_j(. - u)>` over all positions `u`.

use crate::error::{Result, SmfError};
use crate::fft;
use crate::filterbank::FilterBank;
use num_complex::Complex64;
use std::sync::Arc;

/// Wavelet coefficients of one signal under one bank.
///
/// `data` is a `J*Q x N` matrix; `is_modulus` distinguishes complex analysis
/// coefficients from non-negative magnitudes. `lowpass` carries the
/// scaling-function coefficient row `x * phi` when produced by [`analyze`];
/// the thresholding risk sums require it.
#[derive(Debug, Clone)]
pub struct CoeffTensor {
    pub data: Vec<Vec<Complex64>>,
    pub bank: Arc<FilterBank>,
    pub is_modulus: bool,
    pub lowpass: Option<Vec<Complex64>>,
}

impl CoeffTensor {
    pub fn rows(&self) -> usize {
        self.data.len()
    }

    pub fn len(&self) -> usize {
        self.bank.n
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Squared Frobenius norm over wavelet rows plus the lowpass row if
    /// present (the full frame analysis energy).
    pub fn energy(&self) -> f64 {
        let mut e: f64 = self
            .data
            .iter()
            .flat_map(|r| r.iter())
            .map(|v| v.norm_sqr())
            .sum();
        if let Some(lp) = &self.lowpass {
            e += lp.iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
        e
    }
}

/// Continuous wavelet transform: row `j` is
/// `ifft( fft(x) .* conj(psi_hat_j) )`, circular and linear in `x`.
pub fn cwt(x: &[f64], bank: &Arc<FilterBank>) -> Result<CoeffTensor> {
    if x.len() != bank.n {
        return Err(SmfError::ShapeMismatch(format!(
            "signal length {} does not match bank length {}",
            x.len(),
            bank.n
        )));
    }
    let spectrum = fft::forward_real(x);
    let data = bank
        .filters
        .iter()
        .map(|atom| filter_row(&spectrum, atom))
        .collect();
    Ok(CoeffTensor {
        data,
        bank: Arc::clone(bank),
        is_modulus: false,
        lowpass: None,
    })
}

/// Full frame analysis: wavelet rows plus the scaling-function row.
pub fn analyze(x: &[f64], bank: &Arc<FilterBank>) -> Result<CoeffTensor> {
    let mut t = cwt(x, bank)?;
    let spectrum = fft::forward_real(x);
    let mut row: Vec<Complex64> = spectrum
        .iter()
        .zip(bank.phi_hat.iter())
        .map(|(&s, &p)| s * p)
        .collect();
    fft::inverse(&mut row);
    t.lowpass = Some(row);
    Ok(t)
}

fn filter_row(spectrum: &[Complex64], atom: &[Complex64]) -> Vec<Complex64> {
    let mut row: Vec<Complex64> = spectrum
        .iter()
        .zip(atom.iter())
        .map(|(&s, &a)| s * a.conj())
        .collect();
    fft::inverse(&mut row);
    row
}

/// Element-wise complex modulus. Non-expansive; drops the lowpass row
/// (order-0 coefficients are emitted separately, without modulus).
pub fn modulus(c: &CoeffTensor) -> Result<CoeffTensor> {
    if c.is_modulus {
        return Err(SmfError::InvalidState(
            "tensor already holds magnitudes".into(),
        ));
    }
    let data = c
        .data
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| Complex64::new(v.norm(), 0.0))
                .collect()
        })
        .collect();
    Ok(CoeffTensor {
        data,
        bank: Arc::clone(&c.bank),
        is_modulus: true,
        lowpass: None,
    })
}

/// Largest decimation the low-pass spectrum supports without aliasing:
/// content above the half-power frequency of `phi_hat` must stay below the
/// decimated Nyquist.
pub fn max_decimation(phi_hat: &[f64]) -> usize {
    let n = phi_hat.len();
    let half = (0..=n / 2).find(|&k| phi_hat[k].abs() < 0.5);
    match half {
        None => n,
        Some(0) => 1,
        Some(k) => {
            let w_half = fft::bin_frequency(k, n);
            (std::f64::consts::PI / w_half).floor().max(1.0) as usize
        }
    }
}

/// Circularly convolve every row with `phi` and subsample by `decimation`.
///
/// Output is real with `N / decimation` columns per row.
pub fn lowpass_average(
    u: &CoeffTensor,
    phi_hat: &[f64],
    decimation: usize,
) -> Result<Vec<Vec<f64>>> {
    if !u.is_modulus {
        return Err(SmfError::InvalidState(
            "low-pass averaging applies to magnitude tensors".into(),
        ));
    }
    let rows: Vec<&[Complex64]> = u.data.iter().map(|r| r.as_slice()).collect();
    lowpass_rows(&rows, phi_hat, decimation)
}

/// Row-wise smoothing + decimation shared by tensors and the order-0 branch.
pub fn lowpass_rows(
    rows: &[&[Complex64]],
    phi_hat: &[f64],
    decimation: usize,
) -> Result<Vec<Vec<f64>>> {
    let n = phi_hat.len();
    if decimation == 0 || n % decimation != 0 {
        return Err(SmfError::InvalidParameter(format!(
            "decimation {decimation} must divide the signal length {n}"
        )));
    }
    let dmax = max_decimation(phi_hat);
    if decimation > dmax {
        return Err(SmfError::InvalidParameter(format!(
            "decimation {decimation} exceeds the anti-aliasing limit {dmax} for this low-pass"
        )));
    }
    rows.iter()
        .map(|row| {
            if row.len() != n {
                return Err(SmfError::ShapeMismatch(format!(
                    "row length {} vs low-pass length {n}",
                    row.len()
                )));
            }
            let mut buf = row.to_vec();
            fft::forward(&mut buf);
            for (v, &p) in buf.iter_mut().zip(phi_hat.iter()) {
                *v *= p;
            }
            fft::inverse(&mut buf);
            Ok(buf
                .iter()
                .step_by(decimation)
                .map(|v| v.re)
                .collect::<Vec<f64>>())
        })
        .collect()
}
