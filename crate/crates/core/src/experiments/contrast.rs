//! Deterministic ill-conditioned Toeplitz families next to random Toeplitz
//! matrices of the same order.

use crate::conditioning::norm2_power;
use crate::dense::{jacobi_svd, DenseMatrix};
use crate::error::{Error, Result};
use crate::structured::{StructuredMatrix, ToeplitzSpec};

use super::config::{ExperimentConfig, NormChoice};
use super::parallel::{map_trials, with_resample};
use super::stats::SummaryRow;
use super::tables::trial_kappa;
use crate::ensembles::{sample_from, EnsembleSpec, MatrixKind};

/// Largest order accepted; every deterministic value comes from a dense SVD.
pub const CONTRAST_ORDER_LIMIT: usize = 512;

/// Kernel parameter of the symmetric family `t_k = ρ^{k^2}`.
pub const KERNEL_RHO: f64 = 0.9;

pub const KERNEL_ENSEMBLE: &str = "kernel_toeplitz";
pub const SHIFT_ENSEMBLE: &str = "shift_toeplitz";
pub const RANDOM_ENSEMBLE: &str = "toeplitz";

/// Notes recorded in the output header.
pub const CONTRAST_NOTES: &str = "kernel_toeplitz: symmetric t_k=0.9^(k^2); \
shift_toeplitz: I-2Z (t_0=1, t_1=-2), kappa grows like 2^n; toeplitz: random, sampled per --dist";

/// Symmetric Toeplitz with `t_k = ρ^{k^2}`. Its condition number levels
/// off as `n` grows because the symbol stays bounded away from zero.
pub fn kernel_toeplitz(n: usize, rho: f64) -> Result<ToeplitzSpec> {
    let col: Vec<f64> = (0..n).map(|k| rho.powi((k * k) as i32)).collect();
    ToeplitzSpec::from_column_row(&col, &col)
}

/// `I - 2Z`. Its inverse is lower triangular Toeplitz with entries `2^k`.
pub fn shift_toeplitz(n: usize) -> Result<ToeplitzSpec> {
    let mut col = vec![0.0; n];
    col[0] = 1.0;
    if n > 1 {
        col[1] = -2.0;
    }
    let mut row = vec![0.0; n];
    row[0] = 1.0;
    ToeplitzSpec::from_column_row(&col, &row)
}

/// `κ_2` by Jacobi SVD of the dense matrix.
pub fn kappa2_dense(t: &ToeplitzSpec) -> Result<f64> {
    let s = jacobi_svd(&t.to_dense()?)?;
    let lo = *s.last().unwrap();
    if lo == 0.0 {
        return Err(Error::Singular { step: s.len(), pivot: 0.0 });
    }
    Ok(s[0] / lo)
}

/// `κ_2(I - 2Z) = σ_1(I - 2Z) σ_1((I - 2Z)^{-1})`, with the inverse formed
/// exactly so no small singular value is ever resolved. The inverse is
/// scaled by `2^{1-n}` to stay finite; its top singular value is separated
/// from the rest by a factor near `4^n`, so the power method settles at once.
pub fn shift_kappa2(n: usize) -> Result<f64> {
    let a = shift_toeplitz(n)?.to_dense()?;
    let top = n as i32 - 1;
    let inv = DenseMatrix::from_fn(n, n, |i, j| if i >= j { 2f64.powi(i as i32 - j as i32 - top) } else { 0.0 });
    let est = norm2_power(&inv, &vec![1.0; n], 200, 1e-15)?;
    if !est.converged {
        return Err(Error::NonConvergence {
            what: "shift inverse norm",
            iterations: est.iterations,
        });
    }
    Ok(jacobi_svd(&a)?[0] * est.value * 2f64.powi(top))
}

/// `κ_2` of both deterministic families and summarized `κ_2` of random
/// Toeplitz matrices drawn from `cfg.dist`, for every order in `cfg.sizes`.
pub fn run_contrast(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    cfg.validate()?;
    if let Some(&n) = cfg.sizes.iter().find(|&&n| n > CONTRAST_ORDER_LIMIT) {
        return Err(Error::Usage(format!(
            "contrast sizes are limited to {CONTRAST_ORDER_LIMIT}, got {n}"
        )));
    }
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let kernel = kappa2_dense(&kernel_toeplitz(n, KERNEL_RHO)?)?;
        rows.push(SummaryRow::new(KERNEL_ENSEMBLE, n, "kappa_2", &[kernel]));
        rows.push(SummaryRow::new(SHIFT_ENSEMBLE, n, "kappa_2", &[shift_kappa2(n)?]));

        let spec = EnsembleSpec::square(MatrixKind::Toeplitz, n, cfg.dist, cfg.seed);
        let results = map_trials(cfg.trials, cfg.jobs, |trial| {
            let spec = spec.with_trial(trial);
            with_resample(cfg.max_attempts, |attempt| {
                let mut stream = spec.stream(attempt);
                let m = sample_from(MatrixKind::Toeplitz, n, n, &cfg.dist, &mut stream)?;
                random_kappa2(&m, &mut stream)
            })
        })?;
        let mut values = Vec::with_capacity(cfg.trials);
        for r in results {
            values.push(r?.0);
        }
        rows.push(SummaryRow::new(RANDOM_ENSEMBLE, n, "kappa_2", &values));
    }
    Ok(rows)
}

fn random_kappa2(m: &StructuredMatrix, stream: &mut crate::ensembles::TrialStream) -> Result<f64> {
    match m {
        StructuredMatrix::Toeplitz(t) if t.rows() <= 64 => kappa2_dense(t),
        _ => Ok(trial_kappa(m, Some(NormChoice::Two), stream)?.1[0]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::ExperimentKind;

    #[test]
    fn shift_inverse_is_exact() {
        let a = shift_toeplitz(6).unwrap().to_dense().unwrap();
        let inv = DenseMatrix::from_fn(6, 6, |i, j| if i >= j { 2f64.powi((i - j) as i32) } else { 0.0 });
        let p = a.matmul(&inv).unwrap();
        assert_eq!(p, DenseMatrix::identity(6));
    }

    #[test]
    fn shift_matches_dense_kappa() {
        for n in [2, 4, 8] {
            let a = shift_kappa2(n).unwrap();
            let b = kappa2_dense(&shift_toeplitz(n).unwrap()).unwrap();
            assert!((a - b).abs() <= 1e-9 * a, "{n}: {a} vs {b}");
        }
    }

    #[test]
    fn rejects_large_orders() {
        let cfg = ExperimentConfig::new(ExperimentKind::Contrast, vec![MatrixKind::Toeplitz], vec![8, 1024]);
        assert!(matches!(run_contrast(&cfg), Err(Error::Usage(_))));
    }

    #[test]
    fn emits_three_rows_per_order() {
        let cfg = ExperimentConfig::new(ExperimentKind::Contrast, vec![MatrixKind::Toeplitz], vec![4, 8]).trials(5);
        let rows = run_contrast(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.min >= 1.0));
    }
}
