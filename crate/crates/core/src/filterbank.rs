//! Filter-bank construction: dilated analysis spectra, scaling function,
//! Littlewood-Paley diagnostics and the canonical dual frame.
//!
//! Atoms are generated directly on the discrete Fourier grid
//! `omega_k = 2*pi*k/N` mapped to `(-pi, pi]`, never by sampling time-domain
//! formulas. Every analysis atom is L2-renormalized after generation, which
//! overrides the analytic prefactors of the closed forms.
//!
//! Because all atoms are analytic (zero for `omega <= 0`) and the signals
//! are real, the frame operator is diagonalized by the symmetrized
//! Littlewood-Paley sum
//!
//! ```text
//! lp(w) = ( sum_b |psi_b(w)|^2 + sum_b |psi_b(-w)|^2 ) / 2 + |phi(w)|^2
//! ```
//!
//! which is the spectrum of `W^T W` when each complex atom is counted as its
//! real and imaginary parts. Canonical dual atoms divide by this sum
//! pointwise, giving exact reconstruction of real signals via
//! `x = Re ifft( sum_b M_b .* dual_b + M_phi .* dual_phi )`.

use crate::error::{Result, SmfError};
use crate::fft::{bin_frequency, mirror_bin};
use crate::wavelets::WaveletFamily;
use num_complex::Complex64;

/// Fixed numerical constants of the frame machinery.
#[derive(Debug, Clone, Copy)]
pub struct FrameConfig {
    /// Minimum admissible Littlewood-Paley value; below this the bank is
    /// frame-deficient.
    pub frame_floor: f64,
    /// Tolerance on unit atom norms.
    pub norm_tol: f64,
    /// Apply the post-build flattening pass (divide every atom by
    /// `sqrt(lp)` once to tighten the frame).
    pub flatten: bool,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            frame_floor: 1e-6,
            norm_tol: 1e-9,
            flatten: false,
        }
    }
}

/// One family's complete set of dilated analysis spectra plus scaling
/// function and cached frame diagnostics.
#[derive(Debug, Clone)]
pub struct FilterBank {
    /// Generating family; `None` for banks assembled from raw spectra.
    pub family: Option<WaveletFamily>,
    /// Signal length in samples.
    pub n: usize,
    /// Number of octaves (0 for synthetic banks).
    pub j: u32,
    /// Wavelets per octave (0 for synthetic banks).
    pub q: u32,
    /// Scale weight from the placement rule (1.0 for synthetic banks).
    pub alpha: f64,
    /// Scales `lambda_j = alpha * 2^(j/Q)`, strictly increasing.
    pub scales: Vec<f64>,
    /// Analysis spectra, `J*Q` rows of length `n`, unit L2 norm each
    /// (before flattening).
    pub filters: Vec<Vec<Complex64>>,
    /// Real non-negative low-pass spectrum with `phi_hat[0] == 1`.
    pub phi_hat: Vec<f64>,
    /// Symmetrized Littlewood-Paley sum (see module docs).
    pub lp_sum: Vec<f64>,
    /// Canonical dual spectra: `filters / lp_sum` pointwise.
    pub dual_filters: Vec<Vec<Complex64>>,
    /// Dual of the scaling function: `phi_hat / lp_sum`.
    pub dual_phi: Vec<f64>,
    /// L2 norm of the real part of each analysis atom (used by the noise
    /// estimator; 1/sqrt(2) of the atom norm for fully analytic atoms).
    pub re_norms: Vec<f64>,
    /// Whether the flattening pass was applied.
    pub flattened: bool,
}

impl FilterBank {
    /// Build the filter bank for `family` at signal length `n` with `j`
    /// octaves and `q` wavelets per octave, using default [`FrameConfig`].
    pub fn build(family: WaveletFamily, n: usize, j: u32, q: u32) -> Result<Self> {
        Self::build_with(family, n, j, q, FrameConfig::default())
    }

    /// Build with explicit frame configuration.
    pub fn build_with(
        family: WaveletFamily,
        n: usize,
        j: u32,
        q: u32,
        cfg: FrameConfig,
    ) -> Result<Self> {
        if j < 1 || q < 1 {
            return Err(SmfError::InvalidParameter(format!(
                "octaves and quality must be >= 1, got J={j}, Q={q}"
            )));
        }
        if !n.is_power_of_two() || n < (1usize << (j + 2)) {
            return Err(SmfError::InvalidParameter(format!(
                "signal length must be a power of two >= 2^(J+2) = {}, got {n}",
                1usize << (j + 2)
            )));
        }
        let alpha = family.solve_alpha()?;
        let count = (j * q) as usize;
        let scales: Vec<f64> = (0..count)
            .map(|i| alpha * 2f64.powf(i as f64 / q as f64))
            .collect();

        let mut filters = Vec::with_capacity(count);
        for &lambda in &scales {
            let mut row: Vec<Complex64> = (0..n)
                .map(|k| family.spectrum_at(lambda * bin_frequency(k, n)))
                .collect();
            normalize_atom(&mut row, &family, lambda)?;
            filters.push(row);
        }

        let phi_hat = scaling_function(n, j, q, alpha, &family)?;
        let mut bank = Self::assemble(
            Some(family),
            n,
            j,
            q,
            alpha,
            scales,
            filters,
            phi_hat,
            cfg,
        )?;
        bank.flattened = cfg.flatten;
        Ok(bank)
    }

    /// Assemble a bank from raw analysis spectra and a low-pass spectrum.
    ///
    /// Useful for synthetic dictionaries (e.g. an identity/orthonormal bank
    /// in tests). Atoms are taken as-is; only the frame diagnostics and
    /// duals are computed.
    pub fn from_spectra(filters: Vec<Vec<Complex64>>, phi_hat: Vec<f64>) -> Result<Self> {
        let n = phi_hat.len();
        if n < 2 {
            return Err(SmfError::InvalidParameter(
                "bank length must be >= 2".into(),
            ));
        }
        if filters.is_empty() {
            return Err(SmfError::InvalidParameter(
                "bank needs at least one analysis atom".into(),
            ));
        }
        if filters.iter().any(|r| r.len() != n) {
            return Err(SmfError::ShapeMismatch(
                "all spectra must share the scaling function's length".into(),
            ));
        }
        Self::assemble(
            None,
            n,
            0,
            0,
            1.0,
            Vec::new(),
            filters,
            phi_hat,
            FrameConfig::default(),
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        family: Option<WaveletFamily>,
        n: usize,
        j: u32,
        q: u32,
        alpha: f64,
        scales: Vec<f64>,
        mut filters: Vec<Vec<Complex64>>,
        mut phi_hat: Vec<f64>,
        cfg: FrameConfig,
    ) -> Result<Self> {
        let mut lp_sum = littlewood_paley(&filters, &phi_hat);
        check_frame_floor(&lp_sum, n, cfg.frame_floor)?;

        if cfg.flatten {
            for row in filters.iter_mut() {
                for (v, &lp) in row.iter_mut().zip(lp_sum.iter()) {
                    *v /= lp.sqrt();
                }
            }
            for (v, &lp) in phi_hat.iter_mut().zip(lp_sum.iter()) {
                *v /= lp.sqrt();
            }
            lp_sum = littlewood_paley(&filters, &phi_hat);
            check_frame_floor(&lp_sum, n, cfg.frame_floor)?;
        }

        let dual_filters: Vec<Vec<Complex64>> = filters
            .iter()
            .map(|row| {
                row.iter()
                    .zip(lp_sum.iter())
                    .map(|(&v, &lp)| v / lp)
                    .collect()
            })
            .collect();
        let dual_phi: Vec<f64> = phi_hat
            .iter()
            .zip(lp_sum.iter())
            .map(|(&v, &lp)| v / lp)
            .collect();

        let re_norms: Vec<f64> = filters.iter().map(|row| real_part_norm(row)).collect();

        Ok(Self {
            family,
            n,
            j,
            q,
            alpha,
            scales,
            filters,
            phi_hat,
            lp_sum,
            dual_filters,
            dual_phi,
            re_norms,
            flattened: cfg.flatten,
        })
    }

    /// Number of wavelet atoms (`J*Q` for built banks).
    pub fn wavelet_count(&self) -> usize {
        self.filters.len()
    }

    /// Frame bounds `(A, B)`: min and max of the Littlewood-Paley sum.
    pub fn frame_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.lp_sum {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Time-domain analysis atom at scale row `row` (inverse DFT of its
    /// spectrum).
    pub fn atom_time(&self, row: usize) -> Vec<Complex64> {
        let mut buf = self.filters[row].clone();
        crate::fft::inverse(&mut buf);
        buf
    }

    /// Time-domain canonical dual atom at scale row `row`.
    pub fn dual_atom_time(&self, row: usize) -> Vec<Complex64> {
        let mut buf = self.dual_filters[row].clone();
        crate::fft::inverse(&mut buf);
        buf
    }

    /// Time-domain scaling function.
    pub fn phi_time(&self) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self
            .phi_hat
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        crate::fft::inverse(&mut buf);
        buf
    }
}

/// The low-pass spectrum: a real Gaussian bump centered at zero with
/// standard deviation equal to the coarsest wavelet's center frequency and
/// unit DC gain.
pub fn scaling_function(
    n: usize,
    j: u32,
    q: u32,
    alpha: f64,
    family: &WaveletFamily,
) -> Result<Vec<f64>> {
    let count = (j * q) as usize;
    if count == 0 {
        return Err(SmfError::InvalidParameter("empty scale set".into()));
    }
    let coarsest = alpha * 2f64.powf((count - 1) as f64 / q as f64);
    let (sigma, _) = family.center_and_bandwidth(coarsest)?;
    Ok((0..n)
        .map(|k| {
            let w = bin_frequency(k, n);
            (-w * w / (2.0 * sigma * sigma)).exp()
        })
        .collect())
}

/// Symmetrized Littlewood-Paley sum of a spectra set (see module docs).
pub fn littlewood_paley(filters: &[Vec<Complex64>], phi_hat: &[f64]) -> Vec<f64> {
    let n = phi_hat.len();
    let mut one_sided = vec![0.0; n];
    for row in filters {
        for (acc, v) in one_sided.iter_mut().zip(row.iter()) {
            *acc += v.norm_sqr();
        }
    }
    (0..n)
        .map(|k| {
            0.5 * (one_sided[k] + one_sided[mirror_bin(k, n)]) + phi_hat[k] * phi_hat[k]
        })
        .collect()
}

fn check_frame_floor(lp_sum: &[f64], n: usize, floor: f64) -> Result<()> {
    let (kmin, &vmin) = lp_sum
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty lp sum");
    if vmin <= floor {
        return Err(SmfError::FrameDeficient(format!(
            "Littlewood-Paley sum is {vmin:.3e} at omega = {:.5} rad (bin {kmin} of {n}), \
             below the frame floor {floor:.1e}",
            bin_frequency(kmin, n)
        )));
    }
    Ok(())
}

/// Rescale an atom to unit L2 norm: `(1/N) * sum |psi_hat|^2 = 1`.
fn normalize_atom(row: &mut [Complex64], family: &WaveletFamily, lambda: f64) -> Result<()> {
    let n = row.len() as f64;
    let energy: f64 = row.iter().map(|v| v.norm_sqr()).sum();
    if energy <= 0.0 || !energy.is_finite() {
        return Err(SmfError::InvalidParameter(format!(
            "atom at scale {lambda} of {} has no spectral mass on this grid",
            family.label()
        )));
    }
    let scale = (n / energy).sqrt();
    for v in row.iter_mut() {
        *v *= scale;
    }
    Ok(())
}

/// `||Re(psi)||_2` computed from the spectrum:
/// `FFT(Re psi)(w) = (psi_hat(w) + conj(psi_hat(-w))) / 2`.
fn real_part_norm(row: &[Complex64]) -> f64 {
    let n = row.len();
    let sum: f64 = (0..n)
        .map(|k| {
            let v = 0.5 * (row[k] + row[mirror_bin(k, n)].conj());
            v.norm_sqr()
        })
        .sum();
    (sum / n as f64).sqrt()
}
