//! Closed-form mother wavelets in the Fourier domain.
//!
//! Three analytic continuous families are provided: Morlet, Gammatone and
//! Paul. Each exposes its spectrum on an arbitrary frequency grid, the
//! center-frequency/bandwidth pair at a given scale, and the placement rule
//! that positions the mother wavelet just below the Nyquist frequency.
//!
//! All spectra vanish identically for `omega <= 0` (zero-mean, analytic
//! atoms); dilation by `lambda` is performed in the frequency domain as
//! `spectrum(lambda * omega)`.

use crate::error::{Result, SmfError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Highest admissible integer order for Gammatone/Paul.
///
/// `(2m - 1)!` must stay finite in f64; m = 80 gives (159)! ~ 1e282.
const MAX_ORDER: u32 = 80;

/// Bracket for the placement-equation root search.
const ALPHA_BRACKET: (f64, f64) = (1e-3, 1e3);

/// Which mother wavelet a [`WaveletFamily`] is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletKind {
    /// Complex exponential under a Gaussian envelope; optimal time-frequency
    /// trade-off, suited to tonal content.
    Morlet,
    /// Auditory-motivated causal wavelet with an asymmetric envelope.
    Gammatone,
    /// Highly time-localized wavelet, suited to transients.
    Paul,
}

impl WaveletKind {
    pub fn name(&self) -> &'static str {
        match self {
            WaveletKind::Morlet => "morlet",
            WaveletKind::Gammatone => "gammatone",
            WaveletKind::Paul => "paul",
        }
    }
}

/// A parameterized mother wavelet.
///
/// `param` is the Morlet center frequency `omega0`, or the integer order `m`
/// for Gammatone/Paul. `quality_hint` enters only the Gammatone
/// center-frequency/bandwidth formulas (wavelets per octave the bank is
/// designed for).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveletFamily {
    kind: WaveletKind,
    param: f64,
    quality_hint: u32,
}

impl WaveletFamily {
    /// Morlet mother wavelet with center frequency `omega0 > 0`.
    pub fn morlet(omega0: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(SmfError::InvalidParameter(format!(
                "morlet omega0 must be positive and finite, got {omega0}"
            )));
        }
        Ok(Self {
            kind: WaveletKind::Morlet,
            param: omega0,
            quality_hint: 1,
        })
    }

    /// Gammatone wavelet of integer order `m >= 1`.
    ///
    /// `quality_hint >= 1` selects the quasi-orthogonal center frequency
    /// `xi = 2*pi / (1 + 2^(1/Q))` and bandwidth `B = (1 - 2^(-1/Q)) * xi`.
    pub fn gammatone(m: u32, quality_hint: u32) -> Result<Self> {
        if m < 1 || m > MAX_ORDER {
            return Err(SmfError::InvalidParameter(format!(
                "gammatone order must be in 1..={MAX_ORDER}, got {m}"
            )));
        }
        if quality_hint < 1 {
            return Err(SmfError::InvalidParameter(
                "gammatone quality hint must be >= 1".into(),
            ));
        }
        Ok(Self {
            kind: WaveletKind::Gammatone,
            param: m as f64,
            quality_hint,
        })
    }

    /// Paul wavelet of integer order `m >= 1`.
    pub fn paul(m: u32) -> Result<Self> {
        if m < 1 || m > MAX_ORDER {
            return Err(SmfError::InvalidParameter(format!(
                "paul order must be in 1..={MAX_ORDER}, got {m}"
            )));
        }
        Ok(Self {
            kind: WaveletKind::Paul,
            param: m as f64,
            quality_hint: 1,
        })
    }

    /// Build a family from `(kind, param)` as given in run configurations.
    pub fn from_kind(kind: WaveletKind, param: f64, quality_hint: u32) -> Result<Self> {
        match kind {
            WaveletKind::Morlet => Self::morlet(param),
            WaveletKind::Gammatone => {
                if param.fract() != 0.0 {
                    return Err(SmfError::InvalidParameter(format!(
                        "gammatone order must be an integer, got {param}"
                    )));
                }
                Self::gammatone(param as u32, quality_hint)
            }
            WaveletKind::Paul => {
                if param.fract() != 0.0 {
                    return Err(SmfError::InvalidParameter(format!(
                        "paul order must be an integer, got {param}"
                    )));
                }
                Self::paul(param as u32)
            }
        }
    }

    pub fn kind(&self) -> WaveletKind {
        self.kind
    }

    pub fn param(&self) -> f64 {
        self.param
    }

    pub fn quality_hint(&self) -> u32 {
        self.quality_hint
    }

    /// Short label such as `morlet6` or `paul2`, used in feature headers.
    pub fn label(&self) -> String {
        if self.param.fract() == 0.0 {
            format!("{}{}", self.kind.name(), self.param as i64)
        } else {
            format!("{}{}", self.kind.name(), self.param)
        }
    }

    /// Gammatone center frequency `xi` for this family's quality hint.
    fn gammatone_xi(&self) -> f64 {
        let q = self.quality_hint as f64;
        2.0 * PI / (1.0 + 2f64.powf(1.0 / q))
    }

    /// Gammatone bandwidth parameter `B`.
    fn gammatone_b(&self) -> f64 {
        let q = self.quality_hint as f64;
        (1.0 - 2f64.powf(-1.0 / q)) * self.gammatone_xi()
    }

    /// Gammatone envelope decay `sigma` from the half-power closed form
    /// (r = 1/2 convention).
    fn gammatone_sigma(&self) -> f64 {
        let m = self.param;
        let xi = self.gammatone_xi();
        let b = self.gammatone_b();
        let r: f64 = 0.5;
        let r2m = r.powf(2.0 / m);
        let inner = (1.0 + b * b / ((1.0 - r2m).powi(2) * m * m * xi * xi)).sqrt() - 1.0;
        let sigma2 = r2m * (1.0 - r2m) * m * m * xi * xi / 2.0 * inner;
        sigma2.sqrt()
    }

    /// Evaluate the mother spectrum at a single frequency (radians/sample).
    ///
    /// Returns exactly zero for `omega <= 0`: every family is analytic and
    /// zero-mean by construction.
    pub fn spectrum_at(&self, omega: f64) -> Complex64 {
        if omega <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match self.kind {
            WaveletKind::Morlet => {
                let omega0 = self.param;
                let v = PI.powf(-0.25) * (-0.5 * (omega - omega0).powi(2)).exp();
                Complex64::new(v, 0.0)
            }
            WaveletKind::Gammatone => {
                let m = self.param as i32;
                let xi = self.gammatone_xi();
                let sigma = self.gammatone_sigma();
                let num = Complex64::new(0.0, omega * factorial((m - 1) as u32));
                let den = Complex64::new(sigma, omega - xi).powi(m);
                num / den
            }
            WaveletKind::Paul => {
                let m = self.param as u32;
                let norm = 2f64.powi(m as i32) / (self.param * factorial(2 * m - 1)).sqrt();
                let v = norm * omega.powi(m as i32) * (-omega).exp();
                Complex64::new(v, 0.0)
            }
        }
    }

    /// Evaluate the mother spectrum over a frequency grid.
    pub fn spectrum(&self, omega: &[f64]) -> Vec<Complex64> {
        omega.iter().map(|&w| self.spectrum_at(w)).collect()
    }

    /// Center frequency and bandwidth of the wavelet dilated to scale
    /// `lambda > 0`. Both are positive and strictly decreasing in `lambda`.
    pub fn center_and_bandwidth(&self, lambda: f64) -> Result<(f64, f64)> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(SmfError::InvalidParameter(format!(
                "scale must be positive and finite, got {lambda}"
            )));
        }
        Ok(match self.kind {
            WaveletKind::Morlet => (self.param / lambda, 1.0 / (2.0 * lambda * lambda)),
            WaveletKind::Gammatone => {
                // Mother-scale values are (xi, B); children dilate as 1/lambda
                // like the other families.
                (self.gammatone_xi() / lambda, self.gammatone_b() / lambda)
            }
            WaveletKind::Paul => {
                let m = self.param;
                (
                    (2.0 * m + 1.0) / (2.0 * lambda),
                    (2.0 * m + 1.0).sqrt() / (2.0 * lambda),
                )
            }
        })
    }

    /// Solve the mother-wavelet placement equation
    /// `omega_c(alpha) + delta_omega(alpha) = pi` for the scale weight
    /// `alpha`, by bisection on `[1e-3, 1e3]`.
    ///
    /// The left side is strictly decreasing in `alpha` for every family, so
    /// the root is unique when bracketed.
    pub fn solve_alpha(&self) -> Result<f64> {
        let edge = |lambda: f64| -> f64 {
            let (wc, bw) = self
                .center_and_bandwidth(lambda)
                .expect("bracket scales are positive");
            wc + bw - PI
        };
        let (mut lo, mut hi) = ALPHA_BRACKET;
        let (flo, fhi) = (edge(lo), edge(hi));
        if flo.signum() == fhi.signum() {
            return Err(SmfError::PlacementFailure(format!(
                "no placement root in [{lo}, {hi}] for {}",
                self.label()
            )));
        }
        // flo > 0 > fhi (decreasing); bisect to well below the 1e-10 check.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = edge(mid);
            if fm == 0.0 {
                return Ok(mid);
            }
            if fm.signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) < 1e-14 * mid.max(1.0) {
                break;
            }
        }
        let alpha = 0.5 * (lo + hi);
        if edge(alpha).abs() > 1e-10 {
            return Err(SmfError::PlacementFailure(format!(
                "placement residual {} too large for {}",
                edge(alpha).abs(),
                self.label()
            )));
        }
        Ok(alpha)
    }
}

/// `n!` in f64; callers guarantee `n <= 2 * MAX_ORDER` so this stays finite.
fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
