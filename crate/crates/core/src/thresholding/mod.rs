//! Overcomplete-frame risk machinery.
//!
//! A noisy observation `y = x + eps`, `eps ~ N(0, sigma^2)`, is analyzed by a
//! redundant bank `W`. Keeping coefficient `k` costs (an upper bound on) the
//! propagated noise energy
//!
//! ```text
//! R_sel(k)  = sigma^2 * sum_j | <dual_k, dual_j> * <psi_k, psi_j> |
//! ```
//!
//! while dropping it costs the signal energy it carries together with its
//! correlated neighbours
//!
//! ```text
//! R_unsel(k) = sum_j | mu_k * mu_j * <dual_k, dual_j> |
//! ```
//!
//! The selection mask keeps `k` exactly when `R_sel <= R_unsel` (ties keep
//! the coefficient), and the per-path empirical risk is
//! `sum_k min(R_unsel(k), R_sel(k))`.
//!
//! Because the bank is circularly translation-invariant, the pairwise inner
//! products depend only on the scale pair and the lag, so they are stored
//! once as truncated lag kernels and the per-coefficient sums become sparse
//! correlations. The [`oracle`] submodule evaluates the same quantities from
//! explicit dense matrices with no truncation and validates this fast path.
//!
//! Magnitudes `|mu|` of complex coefficients are used throughout; on a real
//! orthonormal dictionary everything reduces to the classical per-coefficient
//! rule `keep iff mu_k^2 >= sigma^2`.

pub mod oracle;

use crate::error::{Result, SmfError};
use crate::fft;
use crate::filterbank::FilterBank;
use crate::transform::{analyze, CoeffTensor};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// MAD-to-standard-deviation factor for Gaussian data.
const MAD_GAUSS: f64 = 0.6745;

/// One truncated lag-correlation sequence for a scale pair.
#[derive(Debug, Clone, Default)]
pub struct SparseLags {
    /// Lags in `(-n/2, n/2]`, ascending.
    pub lags: Vec<i64>,
    pub values: Vec<Complex64>,
}

impl SparseLags {
    /// Value at a given lag (zero if truncated away).
    pub fn at(&self, lag: i64) -> Complex64 {
        match self.lags.binary_search(&lag) {
            Ok(i) => self.values[i],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }
}

/// Lag-domain Gram kernels of a bank.
///
/// Outer index `a` ranges over the wavelet scales (the maskable
/// coefficients); inner index `b` additionally includes the scaling function
/// as the last entry, since the risk sums run over every frame coefficient.
#[derive(Debug, Clone)]
pub struct CorrelationKernels {
    pub n: usize,
    /// Number of wavelet scales (rows of the coefficient tensors).
    pub wavelet_scales: usize,
    pub trunc_eta: f64,
    /// `dual_dual[a][b]` holds `C(a,b)(tau) = <dual_a at u, dual_b at u+tau>`.
    pub dual_dual: Vec<Vec<SparseLags>>,
    /// `analysis_analysis[a][b]` holds `A(a,b)(tau)` for analysis atoms.
    pub analysis_analysis: Vec<Vec<SparseLags>>,
    /// Per-scale `sum_{b,tau} |C * A|`: the selected-risk at sigma = 1.
    pub selected_base: Vec<f64>,
}

impl CorrelationKernels {
    /// Whether any stored kernel entry involves the scaling-function row.
    fn uses_lowpass(&self) -> bool {
        let phi = self.wavelet_scales;
        self.dual_dual
            .iter()
            .any(|row| !row[phi].lags.is_empty())
    }
}

/// Per-window thresholding outcome.
#[derive(Debug, Clone)]
pub struct ThresholdReport {
    /// Selection mask over the wavelet coefficients (`J*Q x N`), `true` =
    /// kept. Scaling-function coefficients are always kept and not listed.
    pub mask: Vec<Vec<bool>>,
    /// Noise standard deviation used for the selected-risk branch.
    pub sigma: f64,
    /// Per-coefficient unselected risk (`J*Q x N`).
    pub risk_unselected: Vec<Vec<f64>>,
    /// Per-scale selected risk (constant over time by translation
    /// invariance).
    pub risk_selected: Vec<f64>,
    /// `sum_k min(risk_unselected, risk_selected)` over wavelet coefficients.
    pub empirical_risk: f64,
    /// Fraction of wavelet coefficients kept, in `[0, 1]`.
    pub selected_fraction: f64,
}

impl ThresholdReport {
    /// One-line textual summary.
    pub fn summary(&self) -> String {
        format!(
            "sigma={:.6e} selected={:.4} empirical_risk={:.6e}",
            self.sigma, self.selected_fraction, self.empirical_risk
        )
    }
}

/// Compute the truncated lag kernels of a bank.
///
/// `C(a,b)` is the inverse DFT of `dual_a .* conj(dual_b)`, `A(a,b)` of
/// `psi_a .* conj(psi_b)`; entries below `trunc_eta` times the largest
/// magnitude across the whole kernel family are dropped.
pub fn gram_kernels(fb: &FilterBank, trunc_eta: f64) -> Result<CorrelationKernels> {
    if !(0.0..1.0).contains(&trunc_eta) {
        return Err(SmfError::InvalidParameter(format!(
            "truncation threshold must be in [0, 1), got {trunc_eta}"
        )));
    }
    let n = fb.n;
    let jq = fb.wavelet_count();

    // spectra with the scaling function appended as row jq
    let dual_rows: Vec<Vec<Complex64>> = fb
        .dual_filters
        .iter()
        .cloned()
        .chain(std::iter::once(
            fb.dual_phi.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        ))
        .collect();
    let ana_rows: Vec<Vec<Complex64>> = fb
        .filters
        .iter()
        .cloned()
        .chain(std::iter::once(
            fb.phi_hat.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        ))
        .collect();

    let raw: Vec<(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)> = (0..jq)
        .into_par_iter()
        .map(|a| {
            let mut c_row = Vec::with_capacity(jq + 1);
            let mut a_row = Vec::with_capacity(jq + 1);
            for b in 0..=jq {
                c_row.push(lag_correlation(&dual_rows[a], &dual_rows[b]));
                a_row.push(lag_correlation(&ana_rows[a], &ana_rows[b]));
            }
            (c_row, a_row)
        })
        .collect();

    let max_abs = |sel: fn(&(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)) -> &Vec<Vec<Complex64>>| {
        raw.iter()
            .flat_map(|p| sel(p).iter().flatten())
            .map(|v| v.norm())
            .fold(0.0f64, f64::max)
    };
    let c_max = max_abs(|p| &p.0);
    let a_max = max_abs(|p| &p.1);

    let mut dual_dual = Vec::with_capacity(jq);
    let mut analysis_analysis = Vec::with_capacity(jq);
    for (c_row, a_row) in raw {
        dual_dual.push(
            c_row
                .into_iter()
                .map(|k| truncate(&k, trunc_eta * c_max))
                .collect::<Vec<_>>(),
        );
        analysis_analysis.push(
            a_row
                .into_iter()
                .map(|k| truncate(&k, trunc_eta * a_max))
                .collect::<Vec<_>>(),
        );
    }

    let selected_base = (0..jq)
        .map(|a| {
            let mut s = 0.0;
            for b in 0..=jq {
                let c = &dual_dual[a][b];
                let an = &analysis_analysis[a][b];
                for (i, &lag) in c.lags.iter().enumerate() {
                    let av = an.at(lag);
                    s += (c.values[i] * av).norm();
                }
            }
            s
        })
        .collect();

    Ok(CorrelationKernels {
        n,
        wavelet_scales: jq,
        trunc_eta,
        dual_dual,
        analysis_analysis,
        selected_base,
    })
}

/// Full-length lag correlation `ifft(f .* conj(g))` indexed by time lag.
fn lag_correlation(f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = f.iter().zip(g.iter()).map(|(&x, &y)| x * y.conj()).collect();
    fft::inverse(&mut buf);
    buf
}

/// Keep entries with magnitude above `floor`, reindexed by signed lag.
fn truncate(full: &[Complex64], floor: f64) -> SparseLags {
    let n = full.len() as i64;
    let mut pairs: Vec<(i64, Complex64)> = full
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > floor)
        .map(|(i, &v)| {
            let i = i as i64;
            let lag = if i <= n / 2 { i } else { i - n };
            (lag, v)
        })
        .collect();
    pairs.sort_by_key(|p| p.0);
    SparseLags {
        lags: pairs.iter().map(|p| p.0).collect(),
        values: pairs.iter().map(|p| p.1).collect(),
    }
}

/// MAD noise estimate from the finest-scale coefficient row.
///
/// The median absolute real part is scaled by the Gaussian MAD constant and
/// by the L2 norm of the atom's real part, so the estimate is consistent for
/// the time-domain noise level (for fully analytic atoms that norm is
/// `1/sqrt(2)`; for a real orthonormal dictionary it is 1).
pub fn estimate_sigma(c: &CoeffTensor) -> Result<f64> {
    let row = c
        .data
        .first()
        .ok_or_else(|| SmfError::InvalidState("empty coefficient tensor".into()))?;
    if row.len() < 16 {
        return Err(SmfError::InvalidParameter(
            "need at least 16 finest-scale coefficients for the MAD estimate".into(),
        ));
    }
    let mut mags: Vec<f64> = row.iter().map(|v| v.re.abs()).collect();
    let mid = mags.len() / 2;
    mags.select_nth_unstable_by(mid, f64::total_cmp);
    let median = if mags.len() % 2 == 1 {
        mags[mid]
    } else {
        let lower = mags[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + mags[mid])
    };
    let re_norm = c.bank.re_norms[0];
    if re_norm == 0.0 {
        return Ok(0.0);
    }
    Ok(median / MAD_GAUSS / re_norm)
}

/// Per-scale selected risk `sigma^2 * sum_{b,tau} |C(a,b) * A(a,b)|`.
///
/// Constant over time positions within a scale by translation invariance.
pub fn risk_selected(kernels: &CorrelationKernels, sigma: f64) -> Vec<f64> {
    kernels
        .selected_base
        .iter()
        .map(|&v| sigma * sigma * v)
        .collect()
}

/// Per-coefficient unselected risk
/// `|mu_a(u)| * sum_{b,tau} |C(a,b)(tau)| * |mu_b(u+tau)|`.
///
/// `c` must be a complex (pre-modulus) tensor carrying the scaling-function
/// row when the kernels reference it.
pub fn risk_unselected(c: &CoeffTensor, kernels: &CorrelationKernels) -> Result<Vec<Vec<f64>>> {
    if c.is_modulus {
        return Err(SmfError::InvalidState(
            "unselected risk needs complex (pre-modulus) coefficients".into(),
        ));
    }
    let n = kernels.n;
    if c.rows() != kernels.wavelet_scales || c.len() != n {
        return Err(SmfError::ShapeMismatch(format!(
            "tensor is {}x{}, kernels expect {}x{n}",
            c.rows(),
            c.len(),
            kernels.wavelet_scales
        )));
    }
    let mut mags: Vec<Vec<f64>> = c
        .data
        .iter()
        .map(|row| row.iter().map(|v| v.norm()).collect())
        .collect();
    match &c.lowpass {
        Some(row) => mags.push(row.iter().map(|v| v.norm()).collect()),
        None => {
            if kernels.uses_lowpass() {
                return Err(SmfError::InvalidState(
                    "kernels include the scaling function; analyze() the signal so the \
                     lowpass coefficient row is available"
                        .into(),
                ));
            }
            mags.push(vec![0.0; n]);
        }
    }

    let out: Vec<Vec<f64>> = (0..kernels.wavelet_scales)
        .into_par_iter()
        .map(|a| {
            let mut acc = vec![0.0f64; n];
            for (b, mag_b) in mags.iter().enumerate() {
                let kernel = &kernels.dual_dual[a][b];
                for (i, &lag) in kernel.lags.iter().enumerate() {
                    let w = kernel.values[i].norm();
                    let s = lag.rem_euclid(n as i64) as usize;
                    // acc[u] += w * mag_b[(u + s) mod n]
                    let (head, tail) = mag_b.split_at(s);
                    for (av, &mv) in acc[..n - s].iter_mut().zip(tail.iter()) {
                        *av += w * mv;
                    }
                    for (av, &mv) in acc[n - s..].iter_mut().zip(head.iter()) {
                        *av += w * mv;
                    }
                }
            }
            for (v, m) in acc.iter_mut().zip(mags[a].iter()) {
                *v *= m;
            }
            acc
        })
        .collect();
    Ok(out)
}

/// Apply the risk-minimizing selection mask to complex coefficients.
///
/// Returns the masked tensor (unselected wavelet coefficients zeroed, the
/// scaling-function row untouched) and the full report.
pub fn threshold(
    c: &CoeffTensor,
    kernels: &CorrelationKernels,
    sigma: f64,
) -> Result<(CoeffTensor, ThresholdReport)> {
    let r_u = risk_unselected(c, kernels)?;
    let r_s = risk_selected(kernels, sigma);

    let mut masked = c.clone();
    let mut mask = Vec::with_capacity(c.rows());
    let mut kept = 0usize;
    let mut empirical_risk = 0.0;
    for (a, row) in r_u.iter().enumerate() {
        let sel = r_s[a];
        let mut mrow = Vec::with_capacity(row.len());
        for (u, &ru) in row.iter().enumerate() {
            let keep = sel <= ru;
            if keep {
                kept += 1;
            } else {
                masked.data[a][u] = Complex64::new(0.0, 0.0);
            }
            empirical_risk += ru.min(sel);
            mrow.push(keep);
        }
        mask.push(mrow);
    }
    let total = (c.rows() * c.len()).max(1);
    let report = ThresholdReport {
        mask,
        sigma,
        risk_unselected: r_u,
        risk_selected: r_s,
        empirical_risk,
        selected_fraction: kept as f64 / total as f64,
    };
    Ok((masked, report))
}

/// Inverse frame synthesis through the canonical dual:
/// `x_hat = Re ifft( sum_a fft(row_a) .* dual_a + fft(lowpass) .* dual_phi )`.
///
/// With an all-ones mask this reproduces the analyzed signal; the
/// scaling-function branch is always present.
pub fn reconstruct(masked: &CoeffTensor, fb: &Arc<FilterBank>) -> Result<Vec<f64>> {
    if masked.is_modulus {
        return Err(SmfError::InvalidState(
            "reconstruction needs complex coefficients".into(),
        ));
    }
    if !Arc::ptr_eq(&masked.bank, fb)
        && (masked.bank.n != fb.n || masked.bank.wavelet_count() != fb.wavelet_count())
    {
        return Err(SmfError::ShapeMismatch(
            "coefficient tensor was produced by a different bank".into(),
        ));
    }
    let lowpass = masked.lowpass.as_ref().ok_or_else(|| {
        SmfError::InvalidState("reconstruction needs the scaling-function row (use analyze)".into())
    })?;
    let n = fb.n;
    let mut accum = vec![Complex64::new(0.0, 0.0); n];
    for (row, dual) in masked.data.iter().zip(fb.dual_filters.iter()) {
        let mut buf = row.clone();
        fft::forward(&mut buf);
        for ((acc, v), &d) in accum.iter_mut().zip(buf.iter()).zip(dual.iter()) {
            *acc += v * d;
        }
    }
    let mut buf = lowpass.clone();
    fft::forward(&mut buf);
    for ((acc, v), &d) in accum.iter_mut().zip(buf.iter()).zip(fb.dual_phi.iter()) {
        *acc += v * d;
    }
    fft::inverse(&mut accum);
    Ok(accum.iter().map(|v| v.re).collect())
}

/// Denoise a signal of arbitrary length with one bank.
///
/// The signal is processed in non-overlapping windows of `fb.n` samples
/// (the trailing partial window is zero-padded), with a per-window MAD noise
/// estimate unless `sigma_override` is given. Returns the denoised signal
/// and one report per window.
pub fn denoise_signal(
    x: &[f64],
    fb: &Arc<FilterBank>,
    kernels: &CorrelationKernels,
    sigma_override: Option<f64>,
) -> Result<(Vec<f64>, Vec<ThresholdReport>)> {
    let n = fb.n;
    let mut out = Vec::with_capacity(x.len());
    let mut reports = Vec::new();
    let mut start = 0usize;
    while start < x.len() {
        let end = (start + n).min(x.len());
        let mut window = vec![0.0; n];
        window[..end - start].copy_from_slice(&x[start..end]);
        let coeffs = analyze(&window, fb)?;
        let sigma = match sigma_override {
            Some(s) => s,
            None => estimate_sigma(&coeffs)?,
        };
        let (masked, report) = threshold(&coeffs, kernels, sigma)?;
        let rec = reconstruct(&masked, fb)?;
        out.extend_from_slice(&rec[..end - start]);
        reports.push(report);
        start = end;
    }
    Ok((out, reports))
}
