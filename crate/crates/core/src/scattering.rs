//! The multi-family scattering tree: stacked layer-1 scalograms, crossed
//! layer-2 decompositions, low-pass scattering coefficients and per-path
//! empirical risks.
//!
//! Layer 1 filters the input with every family's bank and takes the
//! modulus. Layer 2 filters every row (fixed first-layer scale) of every
//! layer-1 scalogram with every family's second-layer bank, along time
//! only, producing both same-family and cross-family paths. Thresholding is
//! applied to the complex coefficients of each path before the modulus
//! (masking commutes with the modulus, so the features agree with
//! post-modulus masking); the per-path empirical risks are recorded whether
//! or not the mask is applied.

use crate::error::{Result, SmfError};
use crate::filterbank::FilterBank;
use crate::thresholding::{estimate_sigma, gram_kernels, threshold, CorrelationKernels};
use crate::transform::{analyze, lowpass_rows, modulus};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Identifies one path through the two-layer tree.
///
/// A first-layer path keeps its whole scale axis, so it carries only the
/// family index; a second-layer path fixes the second-layer family and
/// scale while keeping the first-layer scale axis as its row dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathKey {
    /// `U1[b]`: scalogram of family `b`.
    Order1 { family: usize },
    /// `U2[b1 -> b2, j2]`: rows indexed by the first-layer scale.
    Order2 {
        family1: usize,
        family2: usize,
        scale2: usize,
    },
}

impl PathKey {
    /// Number of steps (1 or 2).
    pub fn order(&self) -> usize {
        match self {
            PathKey::Order1 { .. } => 1,
            PathKey::Order2 { .. } => 2,
        }
    }

    /// Whether this is a cross-family path (`b2 != b1`).
    pub fn is_cross(&self) -> bool {
        matches!(self, PathKey::Order2 { family1, family2, .. } if family1 != family2)
    }
}

/// Options controlling tree computation.
#[derive(Debug, Clone, Copy)]
pub struct ScatterOptions {
    /// Apply the selection mask to the complex coefficients before the
    /// modulus.
    pub sparse: bool,
    /// Kernel truncation threshold.
    pub trunc_eta: f64,
    /// Fixed noise level; estimated per path via MAD when absent.
    pub sigma_override: Option<f64>,
}

impl Default for ScatterOptions {
    fn default() -> Self {
        Self {
            sparse: true,
            trunc_eta: 1e-6,
            sigma_override: None,
        }
    }
}

/// The computed tree: modulus tensors, averaged scattering coefficients,
/// and the per-path empirical risks.
#[derive(Debug, Clone, Default)]
pub struct ScatteringTree {
    /// The analyzed window (kept for the order-0 branch).
    pub signal: Vec<f64>,
    /// Modulus tensors per path. Order-1 entries are `J1*Q1 x N`, order-2
    /// entries are `J1*Q1 x N` with rows indexed by the first-layer scale.
    pub u_tensors: BTreeMap<PathKey, Vec<Vec<f64>>>,
    /// Low-pass averaged (and decimated) coefficients per path.
    pub s_tensors: BTreeMap<PathKey, Vec<Vec<f64>>>,
    /// Averaged order-0 row `y * phi`.
    pub order0: Option<Vec<f64>>,
    /// Scalar empirical risk per path, recorded at the layer where the
    /// path's last filter bank was applied.
    pub risks: BTreeMap<PathKey, f64>,
    /// Fraction of coefficients kept per path (diagnostics).
    pub selected_fractions: BTreeMap<PathKey, f64>,
}

impl ScatteringTree {
    pub fn layer1_done(&self) -> bool {
        self.u_tensors
            .keys()
            .any(|k| matches!(k, PathKey::Order1 { .. }))
    }
}

/// A reusable two-layer scattering engine: banks plus cached kernels.
#[derive(Debug)]
pub struct ScatteringNetwork {
    pub banks1: Vec<Arc<FilterBank>>,
    pub banks2: Vec<Arc<FilterBank>>,
    pub kernels1: Vec<CorrelationKernels>,
    pub kernels2: Vec<CorrelationKernels>,
    pub opts: ScatterOptions,
}

impl ScatteringNetwork {
    /// Build kernels for the given banks. All banks must share one signal
    /// length.
    pub fn new(
        banks1: Vec<Arc<FilterBank>>,
        banks2: Vec<Arc<FilterBank>>,
        opts: ScatterOptions,
    ) -> Result<Self> {
        if banks1.is_empty() {
            return Err(SmfError::InvalidParameter(
                "need at least one first-layer bank".into(),
            ));
        }
        let n = banks1[0].n;
        if banks1.iter().chain(banks2.iter()).any(|b| b.n != n) {
            return Err(SmfError::ShapeMismatch(
                "all banks must share one signal length".into(),
            ));
        }
        let kernels1 = banks1
            .iter()
            .map(|b| gram_kernels(b, opts.trunc_eta))
            .collect::<Result<Vec<_>>>()?;
        let kernels2 = banks2
            .iter()
            .map(|b| gram_kernels(b, opts.trunc_eta))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            banks1,
            banks2,
            kernels1,
            kernels2,
            opts,
        })
    }

    pub fn len(&self) -> usize {
        self.banks1[0].n
    }

    pub fn is_empty(&self) -> bool {
        self.banks1.is_empty()
    }

    /// The shared scattering low-pass: a Gaussian whose width is the
    /// smallest coarsest-atom center frequency over the first-layer banks
    /// (the widest time support, hence the strongest invariance).
    pub fn default_phi(&self) -> Vec<f64> {
        let n = self.len();
        let sigma = self
            .banks1
            .iter()
            .map(|b| {
                let lambda = *b.scales.last().expect("built banks have scales");
                b.family
                    .expect("built banks carry a family")
                    .center_and_bandwidth(lambda)
                    .expect("bank scales are positive")
                    .0
            })
            .fold(f64::INFINITY, f64::min);
        (0..n)
            .map(|k| {
                let w = crate::fft::bin_frequency(k, n);
                (-w * w / (2.0 * sigma * sigma)).exp()
            })
            .collect()
    }

    /// Threshold one path's complex coefficients, returning the modulus
    /// rows (masked when `sparse`), the empirical risk, the per-scale
    /// risk portions and the selected fraction.
    fn filter_path(
        &self,
        signal: &[f64],
        bank_index: usize,
        layer2: bool,
    ) -> Result<PathFiltration> {
        let (bank, kernels) = if layer2 {
            (&self.banks2[bank_index], &self.kernels2[bank_index])
        } else {
            (&self.banks1[bank_index], &self.kernels1[bank_index])
        };
        let coeffs = analyze(signal, bank)?;
        let sigma = match self.opts.sigma_override {
            Some(s) => s,
            None => estimate_sigma(&coeffs)?,
        };
        let (masked, report) = threshold(&coeffs, kernels, sigma)?;
        let basis = if self.opts.sparse { &masked } else { &coeffs };
        let magnitudes = modulus(basis)?;
        let rows: Vec<Vec<f64>> = magnitudes
            .data
            .iter()
            .map(|row| row.iter().map(|v| v.re).collect())
            .collect();
        // empirical risk restricted to each terminal scale
        let per_scale: Vec<f64> = report
            .risk_unselected
            .iter()
            .enumerate()
            .map(|(a, row)| {
                let sel = report.risk_selected[a];
                row.iter().map(|&ru| ru.min(sel)).sum()
            })
            .collect();
        Ok(PathFiltration {
            rows,
            empirical_risk: report.empirical_risk,
            per_scale,
            selected_fraction: report.selected_fraction,
        })
    }

    /// Compute the first layer: one scalogram and one risk per family.
    pub fn layer1(&self, y: &[f64]) -> Result<ScatteringTree> {
        if y.len() != self.len() {
            return Err(SmfError::ShapeMismatch(format!(
                "signal length {} does not match bank length {}",
                y.len(),
                self.len()
            )));
        }
        let results: Vec<PathFiltration> = (0..self.banks1.len())
            .into_par_iter()
            .map(|b| self.filter_path(y, b, false))
            .collect::<Result<Vec<_>>>()?;
        let mut tree = ScatteringTree {
            signal: y.to_vec(),
            ..ScatteringTree::default()
        };
        for (b, f) in results.into_iter().enumerate() {
            let key = PathKey::Order1 { family: b };
            tree.u_tensors.insert(key, f.rows);
            tree.risks.insert(key, f.empirical_risk);
            tree.selected_fractions.insert(key, f.selected_fraction);
        }
        Ok(tree)
    }

    /// Compute the second layer over an existing first layer.
    pub fn layer2(&self, tree: &mut ScatteringTree) -> Result<()> {
        if !tree.layer1_done() {
            return Err(SmfError::InvalidState(
                "second layer requires the first layer".into(),
            ));
        }
        let b1_count = self.banks1.len();
        for b1 in 0..b1_count {
            let parent = tree
                .u_tensors
                .get(&PathKey::Order1 { family: b1 })
                .expect("layer1_done checked")
                .clone();
            // (row j1, family b2) units are independent
            let units: Vec<(usize, usize)> = (0..parent.len())
                .flat_map(|j1| (0..self.banks2.len()).map(move |b2| (j1, b2)))
                .collect();
            let filtered: Vec<(usize, usize, PathFiltration)> = units
                .into_par_iter()
                .map(|(j1, b2)| {
                    let f = self.filter_path(&parent[j1], b2, true)?;
                    Ok((j1, b2, f))
                })
                .collect::<Result<Vec<_>>>()?;

            let rows1 = parent.len();
            for (j1, b2, f) in filtered {
                for (j2, row) in f.rows.into_iter().enumerate() {
                    let key = PathKey::Order2 {
                        family1: b1,
                        family2: b2,
                        scale2: j2,
                    };
                    tree.u_tensors
                        .entry(key)
                        .or_insert_with(|| vec![Vec::new(); rows1])[j1] = row;
                    *tree.risks.entry(key).or_insert(0.0) += f.per_scale[j2];
                    *tree.selected_fractions.entry(key).or_insert(0.0) +=
                        f.selected_fraction / rows1 as f64;
                }
            }
        }
        Ok(())
    }

    /// Low-pass average every path tensor plus the order-0 branch.
    pub fn scatter_coeffs(
        &self,
        tree: &mut ScatteringTree,
        phi_hat: &[f64],
        decimation: usize,
    ) -> Result<()> {
        if tree.u_tensors.is_empty() {
            return Err(SmfError::InvalidState(
                "no tensors to average; run the layers first".into(),
            ));
        }
        let y_complex: Vec<Complex64> = tree
            .signal
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let order0 = lowpass_rows(&[&y_complex], phi_hat, decimation)?;
        tree.order0 = Some(order0.into_iter().next().unwrap());

        let keys: Vec<PathKey> = tree.u_tensors.keys().cloned().collect();
        for key in keys {
            let tensor = &tree.u_tensors[&key];
            let complex_rows: Vec<Vec<Complex64>> = tensor
                .iter()
                .map(|row| row.iter().map(|&v| Complex64::new(v, 0.0)).collect())
                .collect();
            let refs: Vec<&[Complex64]> = complex_rows.iter().map(|r| r.as_slice()).collect();
            let mut averaged = lowpass_rows(&refs, phi_hat, decimation)?;
            // smoothing a non-negative row can ring epsilon-negative
            for row in averaged.iter_mut() {
                for v in row.iter_mut() {
                    if *v < 0.0 {
                        debug_assert!(*v > -1e-9);
                        *v = 0.0;
                    }
                }
            }
            tree.s_tensors.insert(key, averaged);
        }
        Ok(())
    }

    /// Convenience: full two-layer tree with averaged coefficients using
    /// the default low-pass.
    pub fn transform(&self, y: &[f64], decimation: usize) -> Result<ScatteringTree> {
        let mut tree = self.layer1(y)?;
        self.layer2(&mut tree)?;
        let phi = self.default_phi();
        self.scatter_coeffs(&mut tree, &phi, decimation)?;
        Ok(tree)
    }
}

/// One path's filtration outcome.
struct PathFiltration {
    rows: Vec<Vec<f64>>,
    empirical_risk: f64,
    per_scale: Vec<f64>,
    selected_fraction: f64,
}

/// The per-path empirical risks of a computed tree.
pub fn path_risks(tree: &ScatteringTree) -> &BTreeMap<PathKey, f64> {
    &tree.risks
}
