//! Library results against independent reference computations written
//! here from first principles.

mod common;

use std::f64::consts::PI;

use num_complex::Complex64;

use condlab::bounds::{chi_cdf, ln_gamma};
use condlab::conditioning::{circulant_spectrum, toeplitz_norm1, toeplitz_norm_inf};
use condlab::dense::{dense_norms, jacobi_svd, DenseMatrix, LuFactor};
use condlab::dft::{cyclic_convolve, linear_convolve, DftPlan, DftStrategy};
use condlab::ensembles::{Distribution, TrialStream};
use condlab::experiments::contrast::{kappa2_dense, kernel_toeplitz, shift_kappa2, KERNEL_RHO};
use condlab::structured::{FCirculantSpec, HankelSpec, ToeplitzSpec};

use common::{chi_cdf_quadrature, gamma_half};

fn stream(tag: u64) -> TrialStream {
    TrialStream::new(0xC0FFEE, tag, 0)
}

fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, 2.0 * PI * ((j * k) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

#[test]
fn dft_matches_definition() {
    let mut s = stream(1);
    for n in [1, 2, 3, 4, 5, 7, 8, 12, 16, 17, 31, 64, 100, 127] {
        let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(s.standard_normal(), s.standard_normal())).collect();
        let plan = DftPlan::new(n).unwrap();
        let got = plan.forward(&x).unwrap();
        let want = naive_dft(&x);
        let scale = x.iter().map(|v| v.norm()).sum::<f64>();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() <= 1e-12 * scale, "n = {n}");
        }
        let back = plan.inverse(&got).unwrap();
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).norm() <= 1e-12 * scale, "n = {n}");
        }
        let expect = match n {
            1 => DftStrategy::Trivial,
            n if n.is_power_of_two() => DftStrategy::Radix2,
            _ => DftStrategy::Bluestein,
        };
        assert_eq!(plan.strategy(), expect);
    }
}

#[test]
fn convolutions_match_sums() {
    let mut s = stream(2);
    for (la, lb) in [(1, 1), (3, 5), (8, 8), (13, 4)] {
        let a: Vec<f64> = (0..la).map(|_| s.standard_normal()).collect();
        let b: Vec<f64> = (0..lb).map(|_| s.standard_normal()).collect();
        let mut want = vec![0.0; la + lb - 1];
        for i in 0..la {
            for j in 0..lb {
                want[i + j] += a[i] * b[j];
            }
        }
        let got = linear_convolve(&a, &b).unwrap();
        assert!(got.iter().zip(&want).all(|(x, y)| (x - y).abs() < 1e-12));
    }
    let a: Vec<f64> = (0..9).map(|_| s.standard_normal()).collect();
    let b: Vec<f64> = (0..9).map(|_| s.standard_normal()).collect();
    let got = cyclic_convolve(&a, &b).unwrap();
    for k in 0..9 {
        let want: f64 = (0..9).map(|j| a[j] * b[(k + 9 - j) % 9]).sum();
        assert!((got[k] - want).abs() < 1e-12);
    }
}

#[test]
fn structured_products_match_entrywise_definitions() {
    let mut s = stream(3);
    for (m, n) in [(1, 1), (4, 4), (5, 3), (3, 7), (33, 33)] {
        let d: Vec<f64> = (0..m + n - 1).map(|_| s.standard_normal()).collect();
        let x: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();

        let t = ToeplitzSpec::new(m, n, d.clone()).unwrap();
        let want: Vec<f64> = (0..m).map(|i| (0..n).map(|j| d[i + n - 1 - j] * x[j]).sum()).collect();
        let got = t.matvec(&x).unwrap();
        assert!(got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-11), "toeplitz {m}x{n}");

        let h = HankelSpec::new(m, n, d.clone()).unwrap();
        let want: Vec<f64> = (0..m).map(|i| (0..n).map(|j| d[i + j] * x[j]).sum()).collect();
        let got = h.matvec(&x).unwrap();
        assert!(got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-11), "hankel {m}x{n}");

        let dense = DenseMatrix::from_fn(m, n, |i, j| d[i + n - 1 - j]);
        let one = (0..n).map(|j| (0..m).map(|i| dense[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
        let inf = (0..m).map(|i| (0..n).map(|j| dense[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
        assert!((toeplitz_norm1(&t) - one).abs() < 1e-12 * one);
        assert!((toeplitz_norm_inf(&t) - inf).abs() < 1e-12 * inf);
    }
    for f in [1.0, 0.0, -1.0, 2.5, -0.5] {
        for n in [1, 4, 7] {
            let v: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
            let x: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
            let c = FCirculantSpec::new(v.clone(), f).unwrap();
            // Z_f(v) = sum_k v_k Z_f^k, with Z_f the down shift wrapping f into the corner.
            let want: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| if i >= j { v[i - j] } else { f * v[n + i - j] } * x[j]).sum())
                .collect();
            let got = c.matvec(&x).unwrap();
            assert!(got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-11), "f = {f}, n = {n}");
        }
    }
}

#[test]
fn circulant_singular_values_are_dft_moduli() {
    let mut s = stream(4);
    for n in [1, 2, 5, 8, 24] {
        let v: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
        let mut want: Vec<f64> = naive_dft(&v.iter().map(|x| Complex64::new(*x, 0.0)).collect::<Vec<_>>())
            .iter()
            .map(|u| u.norm())
            .collect();
        want.sort_by(|a, b| b.total_cmp(a));
        let got = circulant_spectrum(&FCirculantSpec::circulant(v).unwrap()).unwrap().singular_values;
        assert!(got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}

#[test]
fn dense_oracle_hilbert() {
    // κ_2 of the 4x4 Hilbert matrix.
    let h = DenseMatrix::from_fn(4, 4, |i, j| 1.0 / (i + j + 1) as f64);
    let norms = dense_norms(&h).unwrap();
    assert!((norms.kappa2() / 15_513.738_738_929 - 1.0).abs() < 1e-10);
    // ||H_4||_1 = 1 + 1/2 + 1/3 + 1/4 and ||H_4^{-1}||_1 = 13620.
    assert!((norms.norm1 - 25.0 / 12.0).abs() < 1e-14);
    assert!((norms.inv_norm1 - 13_620.0).abs() < 1e-8);
    let lu = LuFactor::new(&h).unwrap();
    // det H_4 = 1 / 6048000.
    assert!((lu.log_abs_det() + 6_048_000f64.ln()).abs() < 1e-10);
}

#[test]
fn jacobi_recovers_constructed_singular_values() {
    // A = Q1 diag(s) Q2 with Householder reflections Q = I - 2 u u^T / u^T u.
    let mut st = stream(5);
    let n = 12;
    let s: Vec<f64> = (0..n).map(|k| 10f64.powi(-(k as i32))).collect();
    let reflect = |st: &mut TrialStream| {
        let u: Vec<f64> = (0..n).map(|_| st.standard_normal()).collect();
        let uu: f64 = u.iter().map(|x| x * x).sum();
        DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - 2.0 * u[i] * u[j] / uu)
    };
    let q1 = reflect(&mut st);
    let q2 = reflect(&mut st);
    let d = DenseMatrix::from_fn(n, n, |i, j| if i == j { s[i] } else { 0.0 });
    let a = q1.matmul(&d).unwrap().matmul(&q2).unwrap();
    let got = jacobi_svd(&a).unwrap();
    for (g, w) in got.iter().zip(&s) {
        // Two-sided orthogonal scaling keeps only absolute accuracy ~ eps ||A||.
        assert!((g - w).abs() <= 1e-14 + 1e-12 * w, "{g} vs {w}");
    }
}

#[test]
fn chi_cdf_matches_quadrature() {
    for n in 1..=64 {
        for y in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let got = chi_cdf(n, y).unwrap();
            let want = chi_cdf_quadrature(n, y);
            assert!((got - want).abs() <= 1e-10, "n = {n}, y = {y}: {got} vs {want}");
        }
    }
}

#[test]
fn ln_gamma_matches_factorials() {
    let mut fact = 1.0f64;
    for k in 1..30 {
        assert!((ln_gamma(k as f64) - fact.ln()).abs() < 1e-12 * fact.ln().max(1.0), "k = {k}");
        fact *= k as f64;
    }
    for n in 1..60 {
        assert!((ln_gamma(n as f64 / 2.0) - gamma_half(n).ln()).abs() < 1e-12 * gamma_half(n).ln().abs().max(1.0));
    }
}

#[test]
fn normal_cdf_reference_points() {
    let d = Distribution::standard_normal();
    assert!((d.cdf(0.0) - 0.5).abs() < 1e-15);
    // Φ(1.959963984540054) = 0.975
    assert!((d.cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-12);
    assert!((d.cdf(-1.0) - 0.158_655_253_931_457).abs() < 1e-12);
}

// Reference values from 60-digit SVDs (mpmath), computed before the build.
const SHIFT_KAPPA: [(usize, f64); 4] = [
    (4, 29.822_875_152_960_1),
    (8, 503.899_148_461_886),
    (16, 130_533.735_892_724),
    (32, 8_580_926_447.360_8),
];
const KERNEL_KAPPA: [(usize, f64); 3] = [(4, 1291.564_457_668_72), (8, 238_752.099_081_128), (16, 44_302_889.815_437_5)];

#[test]
fn contrast_families_match_frozen_references() {
    for (n, want) in SHIFT_KAPPA {
        let got = shift_kappa2(n).unwrap();
        assert!((got / want - 1.0).abs() < 1e-12, "shift n = {n}: {got}");
    }
    for (n, want) in KERNEL_KAPPA {
        let got = kappa2_dense(&kernel_toeplitz(n, KERNEL_RHO).unwrap()).unwrap();
        // Absolute accuracy of σ_min is about eps σ_max, so relative error grows with κ.
        assert!((got / want - 1.0).abs() < 1e-15 * want, "kernel n = {n}: {got}");
    }
}

#[test]
fn shift_family_log_kappa_is_superlinear() {
    let logs: Vec<f64> = [4, 8, 16, 32].iter().map(|&n| shift_kappa2(n).unwrap().ln()).collect();
    let ratios: Vec<f64> = logs.windows(2).map(|w| w[1] / w[0]).collect();
    assert!(ratios.windows(2).all(|r| r[1] > r[0]), "{ratios:?}");
}
