//! Dense brute-force evaluation of the frame risks.
//!
//! Atoms are materialized as explicit rows, the frame operator is assembled
//! as a dense matrix product over the realified atom set (each complex atom
//! counted as its real and imaginary parts), dual atoms come from a
//! Cholesky solve of the normal equations with one refinement pass, and all
//! pairwise sums are evaluated directly with no truncation. This is the
//! ground truth the lag-kernel fast path is validated against; it shares no
//! code with it.

use crate::error::{Result, SmfError};
use crate::filterbank::FilterBank;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Hard feasibility guard on the dense atom count.
const MAX_DENSE_ATOMS: usize = 4096;

/// Dense risk evaluator over an explicit dictionary.
#[derive(Debug, Clone)]
pub struct DenseOracle {
    n: usize,
    /// Atom rows, `M x N`.
    atoms: DMatrix<Complex64>,
    /// Scale index per atom (`J*Q` = scaling function for bank oracles).
    scale_of: Vec<usize>,
    /// Whether the selection mask may drop this atom's coefficient.
    maskable: Vec<bool>,
    /// Dual atom rows, `M x N`.
    duals: DMatrix<Complex64>,
    /// `|<dual_k, dual_j>|`.
    dual_gram_abs: DMatrix<f64>,
    /// `sum_j |<dual_k, dual_j>| * |<psi_k, psi_j>|` per atom.
    sel_base: Vec<f64>,
}

/// Dense evaluation output for one signal.
#[derive(Debug, Clone)]
pub struct DenseReport {
    /// Coefficients `mu_k = <signal, atom_k>`.
    pub mu: Vec<Complex64>,
    /// Per-coefficient unselected risk.
    pub risk_unselected: Vec<f64>,
    /// Per-coefficient selected risk (`sigma^2 * sel_base`).
    pub risk_selected: Vec<f64>,
    /// Selection mask; non-maskable coefficients are always kept.
    pub mask: Vec<bool>,
    /// `sum_k min(risk_unselected, risk_selected)` over maskable atoms.
    pub risk: f64,
}

impl DenseOracle {
    /// Materialize a filter bank: every wavelet atom at every shift plus the
    /// scaling function at every shift, `N * (J*Q + 1)` atoms total.
    pub fn from_filterbank(fb: &FilterBank) -> Result<Self> {
        let n = fb.n;
        let jq = fb.wavelet_count();
        let total = n * (jq + 1);
        if total > MAX_DENSE_ATOMS {
            return Err(SmfError::SizeGuard(format!(
                "dense oracle limited to {MAX_DENSE_ATOMS} atoms, bank needs {total}"
            )));
        }
        let mut base: Vec<Vec<Complex64>> = (0..jq).map(|a| fb.atom_time(a)).collect();
        base.push(fb.phi_time());

        let mut atoms = DMatrix::zeros(total, n);
        let mut scale_of = Vec::with_capacity(total);
        let mut maskable = Vec::with_capacity(total);
        for (a, atom) in base.iter().enumerate() {
            for u in 0..n {
                let k = a * n + u;
                for t in 0..n {
                    atoms[(k, t)] = atom[(t + n - u) % n];
                }
                scale_of.push(a);
                maskable.push(a < jq);
            }
        }
        Self::assemble(n, atoms, scale_of, maskable)
    }

    /// Dense oracle over an arbitrary real dictionary (rows = atoms).
    ///
    /// Every coefficient is its own "scale" and maskable; intended for
    /// identity/orthonormal reference cases.
    pub fn from_real_dictionary(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(SmfError::InvalidParameter("empty dictionary".into()));
        }
        if m > MAX_DENSE_ATOMS {
            return Err(SmfError::SizeGuard(format!(
                "dense oracle limited to {MAX_DENSE_ATOMS} atoms, got {m}"
            )));
        }
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(SmfError::ShapeMismatch("ragged dictionary rows".into()));
        }
        let mut atoms = DMatrix::zeros(m, n);
        for (k, row) in rows.iter().enumerate() {
            for t in 0..n {
                atoms[(k, t)] = Complex64::new(row[t], 0.0);
            }
        }
        let scale_of = (0..m).collect();
        let maskable = vec![true; m];
        Self::assemble(n, atoms, scale_of, maskable)
    }

    fn assemble(
        n: usize,
        atoms: DMatrix<Complex64>,
        scale_of: Vec<usize>,
        maskable: Vec<bool>,
    ) -> Result<Self> {
        let m = atoms.nrows();

        // Frame operator of the realified atom set: G = sum_k Re_k Re_k^T
        // + Im_k Im_k^T, assembled as a dense product.
        let mut realified = DMatrix::zeros(2 * m, n);
        for k in 0..m {
            for t in 0..n {
                realified[(k, t)] = atoms[(k, t)].re;
                realified[(m + k, t)] = atoms[(k, t)].im;
            }
        }
        let gram = realified.transpose() * &realified;
        let chol = nalgebra::linalg::Cholesky::new(gram.clone()).ok_or_else(|| {
            SmfError::FrameDeficient("dense frame operator is not positive definite".into())
        })?;

        // Dual atoms: solve G d = atom with one iterative-refinement pass.
        let solve_refined = |rhs: &DVector<f64>| -> DVector<f64> {
            let mut d = chol.solve(rhs);
            let resid = rhs - &gram * &d;
            d += chol.solve(&resid);
            d
        };
        let mut duals = DMatrix::zeros(m, n);
        for k in 0..m {
            let re = DVector::from_fn(n, |t, _| atoms[(k, t)].re);
            let im = DVector::from_fn(n, |t, _| atoms[(k, t)].im);
            let dre = solve_refined(&re);
            let dim = solve_refined(&im);
            for t in 0..n {
                duals[(k, t)] = Complex64::new(dre[t], dim[t]);
            }
        }

        // Hermitian Gram magnitudes of duals and analysis atoms.
        let dual_gram = &duals * duals.adjoint();
        let dual_gram_abs = dual_gram.map(|v| v.norm());
        let ana_gram = &atoms * atoms.adjoint();
        let sel_base = (0..m)
            .map(|k| {
                (0..m)
                    .map(|j| dual_gram_abs[(k, j)] * ana_gram[(k, j)].norm())
                    .sum()
            })
            .collect();

        Ok(Self {
            n,
            atoms,
            scale_of,
            maskable,
            duals,
            dual_gram_abs,
            sel_base,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn scale_of(&self) -> &[usize] {
        &self.scale_of
    }

    pub fn maskable(&self) -> &[bool] {
        &self.maskable
    }

    /// `|<dual_k, dual_j>|` (for kernel cross-checks).
    pub fn dual_gram_abs(&self, k: usize, j: usize) -> f64 {
        self.dual_gram_abs[(k, j)]
    }

    /// Coefficients `mu_k = sum_t x(t) * conj(atom_k(t))`.
    pub fn coefficients(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n {
            return Err(SmfError::ShapeMismatch(format!(
                "signal length {} vs oracle length {}",
                x.len(),
                self.n
            )));
        }
        Ok((0..self.atoms.nrows())
            .map(|k| {
                (0..self.n)
                    .map(|t| self.atoms[(k, t)].conj() * x[t])
                    .sum()
            })
            .collect())
    }

    /// Per-coefficient unselected risk from a coefficient vector.
    pub fn risk_unselected(&self, mu: &[Complex64]) -> Vec<f64> {
        let m = self.atoms.nrows();
        let mags: Vec<f64> = mu.iter().map(|v| v.norm()).collect();
        (0..m)
            .map(|k| {
                let s: f64 = (0..m).map(|j| self.dual_gram_abs[(k, j)] * mags[j]).sum();
                mags[k] * s
            })
            .collect()
    }

    /// Per-coefficient selected risk at noise level `sigma`.
    pub fn risk_selected(&self, sigma: f64) -> Vec<f64> {
        self.sel_base.iter().map(|&v| sigma * sigma * v).collect()
    }

    /// Evaluate risks, mask and the min-sum objective for one signal.
    pub fn evaluate(&self, x: &[f64], sigma: f64) -> Result<DenseReport> {
        let mu = self.coefficients(x)?;
        let risk_unselected = self.risk_unselected(&mu);
        let risk_selected = self.risk_selected(sigma);
        let mut risk = 0.0;
        let mask: Vec<bool> = (0..mu.len())
            .map(|k| {
                if !self.maskable[k] {
                    return true;
                }
                risk += risk_unselected[k].min(risk_selected[k]);
                risk_selected[k] <= risk_unselected[k]
            })
            .collect();
        Ok(DenseReport {
            mu,
            risk_unselected,
            risk_selected,
            mask,
            risk,
        })
    }

    /// The objective with the mask forced to all-selected (`D_S = I`):
    /// depends only on sigma and the dictionary, never on the signal.
    pub fn forced_all_selected(&self, sigma: f64) -> f64 {
        let rs = self.risk_selected(sigma);
        (0..rs.len())
            .filter(|&k| self.maskable[k])
            .map(|k| rs[k])
            .sum()
    }

    /// Synthesis through the dense duals:
    /// `x_hat(t) = sum_k mask_k * Re( mu_k * d_k(t) )`.
    pub fn synthesize(&self, mu: &[Complex64], mask: &[bool]) -> Result<Vec<f64>> {
        let m = self.atoms.nrows();
        if mu.len() != m || mask.len() != m {
            return Err(SmfError::ShapeMismatch(format!(
                "expected {m} coefficients/mask bits, got {}/{}",
                mu.len(),
                mask.len()
            )));
        }
        let mut out = vec![0.0f64; self.n];
        for k in 0..m {
            if !mask[k] {
                continue;
            }
            for (t, o) in out.iter_mut().enumerate() {
                *o += (mu[k] * self.duals[(k, t)]).re;
            }
        }
        Ok(out)
    }

    /// The dense `W_dagger * W` operator as an explicit matrix: column `t`
    /// is the full-mask synthesis of the analysis of the unit impulse at
    /// `t`. Equals the identity for a proper frame.
    pub fn projection_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.n;
        let mask = vec![true; self.atoms.nrows()];
        let mut p = DMatrix::zeros(n, n);
        for t in 0..n {
            let mut e = vec![0.0; n];
            e[t] = 1.0;
            let mu = self.coefficients(&e)?;
            let col = self.synthesize(&mu, &mask)?;
            for (r, &v) in col.iter().enumerate() {
                p[(r, t)] = v;
            }
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelets::WaveletFamily;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    #[test]
    fn identity_closed_form_two_samples() {
        // W = I, x = (3, 0.1), sigma = 1: ideal risk min(9,1) + min(0.01,1).
        let oracle =
            DenseOracle::from_real_dictionary(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let rep = oracle.evaluate(&[3.0, 0.1], 1.0).unwrap();
        assert!((rep.risk - 1.01).abs() < 1e-12);
        assert_eq!(rep.mask, vec![true, false]);
    }

    #[test]
    fn orthonormal_risk_matches_appendix_rule() {
        // On a real orthonormal dictionary the upper bound collapses to
        // sum_i min([Wx]_i^2, sigma^2).
        let n = 16;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // random orthonormal basis via Gram-Schmidt on a Gaussian matrix
        let mut basis: Vec<Vec<f64>> = Vec::new();
        while basis.len() < n {
            let mut v: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
            for b in &basis {
                let dot: f64 = v.iter().zip(b.iter()).map(|(a, c)| a * c).sum();
                for (vi, bi) in v.iter_mut().zip(b.iter()) {
                    *vi -= dot * bi;
                }
            }
            let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
                basis.push(v);
            }
        }
        let oracle = DenseOracle::from_real_dictionary(basis.clone()).unwrap();
        for trial in 0..10 {
            let x: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
            let sigma = 0.2 + 0.1 * trial as f64;
            let rep = oracle.evaluate(&x, sigma).unwrap();
            let expected: f64 = basis
                .iter()
                .map(|b| {
                    let mu: f64 = b.iter().zip(x.iter()).map(|(a, c)| a * c).sum();
                    (mu * mu).min(sigma * sigma)
                })
                .sum();
            assert!((rep.risk - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn forced_selection_ignores_the_signal() {
        let fb = FilterBank::build(WaveletFamily::morlet(6.0).unwrap(), 64, 3, 2).unwrap();
        let oracle = DenseOracle::from_filterbank(&fb).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..64).map(|_| gaussian(&mut rng)).collect();
        let y: Vec<f64> = (0..64).map(|_| gaussian(&mut rng)).collect();
        let sigma = 0.7;
        let forced = oracle.forced_all_selected(sigma);
        // forcing D_S = I in the min-sum for any signal gives the same value
        let rep_x = oracle.evaluate(&x, sigma).unwrap();
        let rep_y = oracle.evaluate(&y, sigma).unwrap();
        let sum_sel =
            |rep: &DenseReport| -> f64 {
                rep.risk_selected
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| oracle.maskable()[*k])
                    .map(|(_, v)| v)
                    .sum()
            };
        assert_eq!(sum_sel(&rep_x), forced);
        assert_eq!(sum_sel(&rep_y), forced);
        assert!((sum_sel(&rep_x) - sum_sel(&rep_y)).abs() < 1e-12);
    }

    #[test]
    fn size_guard_enforced() {
        let fb = FilterBank::build(WaveletFamily::morlet(6.0).unwrap(), 1024, 5, 8).unwrap();
        assert!(matches!(
            DenseOracle::from_filterbank(&fb),
            Err(SmfError::SizeGuard(_))
        ));
    }

    #[test]
    fn full_mask_synthesis_inverts_analysis() {
        let fb = FilterBank::build(WaveletFamily::paul(2).unwrap(), 64, 3, 2).unwrap();
        let oracle = DenseOracle::from_filterbank(&fb).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let x: Vec<f64> = (0..64).map(|_| gaussian(&mut rng)).collect();
        let mu = oracle.coefficients(&x).unwrap();
        let rec = oracle
            .synthesize(&mu, &vec![true; oracle.atom_count()])
            .unwrap();
        for (a, b) in x.iter().zip(rec.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_matrix_is_identity() {
        let fb = FilterBank::build(WaveletFamily::morlet(6.0).unwrap(), 64, 3, 2).unwrap();
        let oracle = DenseOracle::from_filterbank(&fb).unwrap();
        let p = oracle.projection_matrix().unwrap();
        let mut max_err = 0.0f64;
        for r in 0..64 {
            for c in 0..64 {
                let target = if r == c { 1.0 } else { 0.0 };
                max_err = max_err.max((p[(r, c)] - target).abs());
            }
        }
        assert!(max_err < 1e-6, "max |P - I| = {max_err:.3e}");
    }
}
