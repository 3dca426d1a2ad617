//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture`.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use smf_core::filterbank::FilterBank;
use smf_core::thresholding::oracle::DenseOracle;
use smf_core::thresholding::{gram_kernels, risk_selected, risk_unselected, threshold};
use smf_core::transform::analyze;
use smf_core::wavelets::WaveletFamily;
use std::sync::Arc;
use std::time::Instant;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

fn all_families() -> Vec<WaveletFamily> {
    vec![
        WaveletFamily::morlet(6.0).unwrap(),
        WaveletFamily::gammatone(4, 8).unwrap(),
        WaveletFamily::paul(2).unwrap(),
    ]
}

struct Criterion {
    number: u32,
    label: &'static str,
}

impl Criterion {
    fn new(number: u32, label: &'static str) -> Self {
        Self { number, label }
    }

    fn pass(&self, detail: String) {
        println!("criterion {:2}: PASS  {} — {detail}", self.number, self.label);
    }

    fn fail(&self, detail: String) -> ! {
        println!("criterion {:2}: FAIL  {} — {detail}", self.number, self.label);
        panic!("criterion {} failed: {detail}", self.number);
    }
}

/// Criterion 1: on orthonormal dictionaries the dense upper-bound risk
/// equals the classical ideal risk `sum_i min([Wx]_i^2, sigma^2)` to 1e-10,
/// for 50 random (x, sigma) pairs, in under 5 seconds.
#[test]
fn criterion_01_orthonormal_reduction() {
    let c = Criterion::new(1, "orthonormal risk reduction");
    let start = Instant::now();
    let n = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(101);

    let identity: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            row
        })
        .collect();
    // random real orthonormal transform via Gram-Schmidt
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    while ortho.len() < n {
        let mut v = gaussian_vec(&mut rng, n);
        for b in &ortho {
            let dot: f64 = v.iter().zip(b.iter()).map(|(a, c)| a * c).sum();
            for (vi, bi) in v.iter_mut().zip(b.iter()) {
                *vi -= dot * bi;
            }
        }
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            ortho.push(v);
        }
    }

    let mut worst = 0.0f64;
    for basis in [identity, ortho] {
        let oracle = DenseOracle::from_real_dictionary(basis.clone()).unwrap();
        for _ in 0..25 {
            let x = gaussian_vec(&mut rng, n);
            let sigma = rng.gen_range(0.05..2.0);
            let rep = oracle.evaluate(&x, sigma).unwrap();
            let ideal: f64 = basis
                .iter()
                .map(|row| {
                    let mu: f64 = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                    (mu * mu).min(sigma * sigma)
                })
                .sum();
            worst = worst.max((rep.risk - ideal).abs());
        }
    }
    let elapsed = start.elapsed();
    if worst > 1e-10 {
        c.fail(format!("max |R_up - ideal| = {worst:.3e} exceeds 1e-10"));
    }
    if elapsed.as_secs_f64() > 5.0 {
        c.fail(format!("runtime {:.2}s exceeds 5s", elapsed.as_secs_f64()));
    }
    c.pass(format!(
        "max |R_up - ideal| = {worst:.3e} over 50 pairs in {:.2}s",
        elapsed.as_secs_f64()
    ));
}

/// Criterion 2: with the mask forced to all-selected the empirical risk
/// equals the upper-bound ideal risk exactly and ignores the signal.
#[test]
fn criterion_02_forced_selection_risk() {
    let c = Criterion::new(2, "forced-selection risk identity");
    let fb = FilterBank::build(WaveletFamily::morlet(6.0).unwrap(), 64, 3, 2).unwrap();
    let oracle = DenseOracle::from_filterbank(&fb).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let sigma = 0.35;
    let forced = oracle.forced_all_selected(sigma);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let x = gaussian_vec(&mut rng, 64);
        let rep = oracle.evaluate(&x, sigma).unwrap();
        let forced_from_signal: f64 = rep
            .risk_selected
            .iter()
            .enumerate()
            .filter(|(k, _)| oracle.maskable()[*k])
            .map(|(_, v)| v)
            .sum();
        worst = worst.max((forced_from_signal - forced).abs());
    }
    if worst > 1e-12 {
        c.fail(format!("forced risk varies with the signal by {worst:.3e}"));
    }
    c.pass(format!(
        "forced risk {forced:.6e} invariant over 10 signals (max dev {worst:.1e})"
    ));
}

/// Criterion 3: the lag-kernel fast path reproduces the dense oracle's
/// unselected/selected risks, mask and empirical risk within 1e-8 relative
/// for all three families at N=64, J=3, Q=2, 20 random signals, < 30 s.
#[test]
fn criterion_03_oracle_equivalence() {
    let c = Criterion::new(3, "fast path matches dense oracle");
    let start = Instant::now();
    let n = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_rel = 0.0f64;
    let mut mask_mismatches = 0usize;

    for family in all_families() {
        let fb = Arc::new(FilterBank::build(family, n, 3, 2).unwrap());
        let jq = fb.wavelet_count();
        let kernels = gram_kernels(&fb, 0.0).unwrap();
        let oracle = DenseOracle::from_filterbank(&fb).unwrap();

        for _ in 0..20 {
            let x = gaussian_vec(&mut rng, n);
            let sigma = rng.gen_range(0.05..1.5);
            let coeffs = analyze(&x, &fb).unwrap();
            let fast_ru = risk_unselected(&coeffs, &kernels).unwrap();
            let fast_rs = risk_selected(&kernels, sigma);
            let (_, fast_rep) = threshold(&coeffs, &kernels, sigma).unwrap();
            let dense = oracle.evaluate(&x, sigma).unwrap();

            for a in 0..jq {
                let rel_s = (fast_rs[a] - dense.risk_selected[a * n]).abs()
                    / dense.risk_selected[a * n].abs().max(1e-300);
                worst_rel = worst_rel.max(rel_s);
                for u in 0..n {
                    let k = a * n + u;
                    let denom = dense.risk_unselected[k].abs().max(1e-12);
                    let rel = (fast_ru[a][u] - dense.risk_unselected[k]).abs() / denom;
                    worst_rel = worst_rel.max(rel);
                    // compare mask bits away from exact ties
                    let gap = (dense.risk_unselected[k] - dense.risk_selected[k]).abs()
                        / dense.risk_selected[k].max(1e-12);
                    if gap > 1e-6 && fast_rep.mask[a][u] != dense.mask[k] {
                        mask_mismatches += 1;
                    }
                }
            }
            let dense_masked: f64 = dense.risk;
            let rel_total =
                (fast_rep.empirical_risk - dense_masked).abs() / dense_masked.max(1e-12);
            worst_rel = worst_rel.max(rel_total);
        }
    }
    let elapsed = start.elapsed();
    if worst_rel > 1e-8 {
        c.fail(format!("worst relative deviation {worst_rel:.3e} exceeds 1e-8"));
    }
    if mask_mismatches > 0 {
        c.fail(format!("{mask_mismatches} mask bits disagree away from ties"));
    }
    if elapsed.as_secs_f64() > 30.0 {
        c.fail(format!("runtime {:.2}s exceeds 30s", elapsed.as_secs_f64()));
    }
    c.pass(format!(
        "worst relative deviation {worst_rel:.3e}, masks identical, {:.2}s",
        elapsed.as_secs_f64()
    ));
}

/// Criterion 4: frame correctness. Dense `W_dagger W = I` within 1e-6
/// max-abs at N=64 for all three families; FFT-path reconstruction within
/// 1e-8 relative L2 at N=4096.
#[test]
fn criterion_04_frame_correctness() {
    let c = Criterion::new(4, "frame correctness");
    let mut worst_dense = 0.0f64;
    let mut worst_fft = 0.0f64;
    for family in all_families() {
        let fb = FilterBank::build(family, 64, 3, 2).unwrap();
        let oracle = DenseOracle::from_filterbank(&fb).unwrap();
        let p = oracle.projection_matrix().unwrap();
        for r in 0..64 {
            for col in 0..64 {
                let target = if r == col { 1.0 } else { 0.0 };
                worst_dense = worst_dense.max((p[(r, col)] - target).abs());
            }
        }

        let fb_big = Arc::new(FilterBank::build(family, 4096, 5, 8).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let x = gaussian_vec(&mut rng, 4096);
        let coeffs = analyze(&x, &fb_big).unwrap();
        let rec = smf_core::thresholding::reconstruct(&coeffs, &fb_big).unwrap();
        let num: f64 = x.iter().zip(rec.iter()).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = x.iter().map(|v| v * v).sum();
        worst_fft = worst_fft.max((num / den).sqrt());
    }
    if worst_dense > 1e-6 {
        c.fail(format!("max |W_dagger W - I| = {worst_dense:.3e} exceeds 1e-6"));
    }
    if worst_fft > 1e-8 {
        c.fail(format!(
            "FFT reconstruction relative error {worst_fft:.3e} exceeds 1e-8"
        ));
    }
    c.pass(format!(
        "dense max |W_dagger W - I| = {worst_dense:.3e}, FFT rel err = {worst_fft:.3e}"
    ));
}

/// Criterion 6: the dense per-coefficient selected risk is constant over
/// time positions within each scale (variation < 1e-10).
#[test]
fn criterion_06_per_scale_constancy() {
    let c = Criterion::new(6, "per-scale selected-risk constancy");
    let n = 64;
    let mut worst = 0.0f64;
    for family in all_families() {
        let fb = FilterBank::build(family, n, 3, 2).unwrap();
        let oracle = DenseOracle::from_filterbank(&fb).unwrap();
        let rs = oracle.risk_selected(1.0);
        let scales = fb.wavelet_count() + 1;
        for a in 0..scales {
            let row = &rs[a * n..(a + 1) * n];
            let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(hi - lo);
        }
    }
    if worst > 1e-10 {
        c.fail(format!("per-scale spread {worst:.3e} exceeds 1e-10"));
    }
    c.pass(format!("max per-scale spread {worst:.3e}"));
}

/// Complex64 is used in signatures above; keep the import honest.
#[allow(dead_code)]
fn _complex_in_use(v: Complex64) -> f64 {
    v.norm()
}
