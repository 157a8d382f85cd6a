//! Norm and condition-number tables over random ensembles.

use crate::conditioning::{
    circulant_spectrum, inv_norm1_estimate, norm2_power, sigma_min_inverse_power, toeplitz_norm1,
    LuInverse, PowerEstimate, DEFAULT_TOL, INVERSE_MAX_ITER, NORM_MAX_ITER,
};
use crate::dense::{jacobi_svd, DenseMatrix, LuFactor};
use crate::ensembles::{sample_from, EnsembleSpec, MatrixKind, TrialStream};
use crate::error::{Error, Result};
use crate::gs::{build_gs_a, GsInverse};
use crate::structured::{LinearOperator, StructuredMatrix, ToeplitzOperator, ToeplitzSpec};

use super::config::{ExperimentConfig, ExperimentKind, NormChoice};
use super::parallel::{map_trials, with_resample};
use super::stats::SummaryRow;

/// General matrices up to this order get exact singular values from Jacobi;
/// larger ones use power and inverse power iteration.
pub const GENERAL_SVD_LIMIT: usize = 256;

/// Order of the metrics emitted by [`run_table_norms`]. The `fro` columns
/// repeat the 2-norm columns with Frobenius norms.
pub const NORM_METRICS: [&str; 10] = [
    "norm_1",
    "norm_2",
    "ratio_1_2",
    "inv_norm_1",
    "inv_norm_2",
    "inv_ratio_1_2",
    "norm_fro",
    "ratio_1_fro",
    "inv_norm_fro",
    "inv_ratio_1_fro",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TableReport {
    pub experiment: ExperimentKind,
    pub rows: Vec<SummaryRow>,
    /// Trials summarized per (ensemble, n).
    pub trials: usize,
    /// Total redraws over all batches.
    pub resampled: u64,
    /// Power iterations that hit their cap (their lower-bound estimate is kept).
    pub unconverged: u64,
}

/// Per-trial observables before aggregation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialNorms {
    pub norm1: f64,
    pub norm2: f64,
    pub inv_norm1: f64,
    pub inv_norm2: f64,
    pub norm_fro: f64,
    pub inv_norm_fro: f64,
    pub unconverged: u32,
}

impl TrialNorms {
    pub fn metrics(&self) -> [f64; 10] {
        [
            self.norm1,
            self.norm2,
            self.norm1 / self.norm2,
            self.inv_norm1,
            self.inv_norm2,
            self.inv_norm1 / self.inv_norm2,
            self.norm_fro,
            self.norm1 / self.norm_fro,
            self.inv_norm_fro,
            self.inv_norm1 / self.inv_norm_fro,
        ]
    }
}

fn gaussian_start(stream: &mut TrialStream, n: usize) -> Vec<f64> {
    (0..n).map(|_| stream.standard_normal()).collect()
}

fn unconverged(estimates: &[PowerEstimate]) -> u32 {
    estimates.iter().filter(|e| !e.converged).count() as u32
}

/// `sqrt(Σ_h count_h t_h^2)` with `count_h` entries on diagonal `h`.
pub fn toeplitz_fro(t: &ToeplitzSpec) -> f64 {
    let (m, n) = (t.rows() as isize, t.cols() as isize);
    (1 - n..m)
        .map(|h| {
            // rows i with column i - h in range
            let count = (m.min(n + h) - h.max(0)).max(0) as f64;
            let v = t.t(h);
            count * v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// The square Toeplitz matrix whose conditioning equals that of `m`.
fn toeplitz_view(m: &StructuredMatrix) -> Option<ToeplitzSpec> {
    match m {
        StructuredMatrix::Toeplitz(t) => Some(t.clone()),
        // H = T J only permutes columns; norms and singular values agree.
        StructuredMatrix::Hankel(h) => Some(h.to_toeplitz().0),
        StructuredMatrix::FCirculant(c) if c.f() != 1.0 => Some(c.as_toeplitz()),
        _ => None,
    }
}

fn general_extremes(a: &DenseMatrix, lu: &LuFactor, stream: &mut TrialStream) -> Result<(PowerEstimate, PowerEstimate)> {
    let n = a.rows();
    if n <= GENERAL_SVD_LIMIT {
        let s = jacobi_svd(a)?;
        let exact = |value| PowerEstimate {
            value,
            iterations: 0,
            converged: true,
        };
        return Ok((exact(s[0]), exact(s[n - 1])));
    }
    let hi = norm2_power(a, &gaussian_start(stream, n), NORM_MAX_ITER, DEFAULT_TOL)?;
    let lo = sigma_min_inverse_power(&LuInverse(lu), &gaussian_start(stream, n), INVERSE_MAX_ITER, DEFAULT_TOL)?;
    Ok((hi, lo))
}

fn toeplitz_extremes(t: &ToeplitzSpec, gs: &GsInverse, stream: &mut TrialStream) -> Result<(PowerEstimate, PowerEstimate)> {
    let n = t.rows();
    let op = ToeplitzOperator::new(t);
    let hi = norm2_power(&op, &gaussian_start(stream, n), NORM_MAX_ITER, DEFAULT_TOL)?;
    let lo = sigma_min_inverse_power(gs, &gaussian_start(stream, n), INVERSE_MAX_ITER, DEFAULT_TOL)?;
    Ok((hi, lo))
}

fn gs_inv_norm1_estimate(gs: &GsInverse) -> f64 {
    let apply = |x: &[f64]| LinearOperator::apply(gs, x);
    let apply_t = |x: &[f64]| LinearOperator::apply_transpose(gs, x);
    inv_norm1_estimate(&apply, &apply_t, gs.order())
}

/// Norms of one sampled matrix and of its inverse.
pub fn trial_norms(m: &StructuredMatrix, stream: &mut TrialStream) -> Result<TrialNorms> {
    if let Some(t) = toeplitz_view(m) {
        let gs = build_gs_a(&t)?;
        let (hi, lo) = toeplitz_extremes(&t, &gs, stream)?;
        let (_, inv_fro) = gs.norms_exact();
        return Ok(TrialNorms {
            norm1: toeplitz_norm1(&t),
            norm2: hi.value,
            inv_norm1: gs_inv_norm1_estimate(&gs),
            inv_norm2: 1.0 / lo.value,
            norm_fro: toeplitz_fro(&t),
            inv_norm_fro: inv_fro,
            unconverged: unconverged(&[hi, lo]),
        });
    }
    match m {
        StructuredMatrix::General(a) => {
            let lu = LuFactor::new(a)?;
            let inv = lu.inverse();
            let (hi, lo) = general_extremes(a, &lu, stream)?;
            Ok(TrialNorms {
                norm1: a.norm1(),
                norm2: hi.value,
                inv_norm1: inv.norm1(),
                inv_norm2: 1.0 / lo.value,
                norm_fro: a.norm_fro(),
                inv_norm_fro: inv.norm_fro(),
                unconverged: unconverged(&[hi, lo]),
            })
        }
        StructuredMatrix::FCirculant(c) => {
            let s = circulant_spectrum(c)?;
            if s.singular {
                return Err(Error::Singular {
                    step: 0,
                    pivot: s.sigma_min(),
                });
            }
            let v1: f64 = c.column().iter().map(|v| v.abs()).sum();
            let fro = (c.order() as f64).sqrt() * c.column().iter().map(|v| v * v).sum::<f64>().sqrt();
            Ok(TrialNorms {
                norm1: v1,
                norm2: s.sigma_max(),
                inv_norm1: s.inverse_norm1()?,
                inv_norm2: 1.0 / s.sigma_min(),
                norm_fro: fro,
                inv_norm_fro: s.inverse_norm_fro(),
                unconverged: 0,
            })
        }
        _ => unreachable!("handled by toeplitz_view"),
    }
}

/// The condition number names and values for one trial.
pub fn trial_kappa(m: &StructuredMatrix, norm: Option<NormChoice>, stream: &mut TrialStream) -> Result<(Vec<&'static str>, Vec<f64>)> {
    if let Some(t) = toeplitz_view(m) {
        let gs = build_gs_a(&t)?;
        return match norm.unwrap_or(NormChoice::One) {
            NormChoice::One => {
                let n1 = toeplitz_norm1(&t);
                let (exact, _) = gs.norms_exact();
                Ok((
                    vec!["kappa_1", "kappa_1_exact"],
                    vec![n1 * gs_inv_norm1_estimate(&gs), n1 * exact],
                ))
            }
            NormChoice::Two => {
                let (hi, lo) = toeplitz_extremes(&t, &gs, stream)?;
                Ok((vec!["kappa_2"], vec![hi.value / lo.value]))
            }
        };
    }
    match m {
        StructuredMatrix::General(a) => {
            let lu = LuFactor::new(a)?;
            match norm.unwrap_or(NormChoice::Two) {
                NormChoice::One => Ok((vec!["kappa_1"], vec![a.norm1() * lu.inverse().norm1()])),
                NormChoice::Two => {
                    let (hi, lo) = general_extremes(a, &lu, stream)?;
                    Ok((vec!["kappa_2"], vec![hi.value / lo.value]))
                }
            }
        }
        StructuredMatrix::FCirculant(c) => {
            let s = circulant_spectrum(c)?;
            if s.singular {
                return Err(Error::Singular {
                    step: 0,
                    pivot: s.sigma_min(),
                });
            }
            match norm.unwrap_or(NormChoice::Two) {
                NormChoice::One => {
                    let v1: f64 = c.column().iter().map(|v| v.abs()).sum();
                    Ok((vec!["kappa_1"], vec![v1 * s.inverse_norm1()?]))
                }
                NormChoice::Two => Ok((vec!["kappa_2"], vec![s.kappa2()])),
            }
        }
        _ => unreachable!("handled by toeplitz_view"),
    }
}

/// A batch of per-trial observables for one (ensemble, n).
struct Batch {
    names: Vec<&'static str>,
    values: Vec<Vec<f64>>,
    resampled: u64,
    unconverged: u64,
}

type TrialFn<'a> = dyn Fn(&StructuredMatrix, &mut TrialStream) -> Result<(Vec<&'static str>, Vec<f64>, u32)> + Sync + 'a;

fn run_batch(cfg: &ExperimentConfig, kind: MatrixKind, n: usize, eval: &TrialFn<'_>) -> Result<Batch> {
    let spec = EnsembleSpec::square(kind, n, cfg.dist, cfg.seed);
    let results = map_trials(cfg.trials, cfg.jobs, |trial| {
        let spec = spec.with_trial(trial);
        with_resample(cfg.max_attempts, |attempt| {
            let mut stream = spec.stream(attempt);
            let m = sample_from(kind, n, n, &cfg.dist, &mut stream)?;
            eval(&m, &mut stream)
        })
    })?;
    let mut batch = Batch {
        names: Vec::new(),
        values: Vec::new(),
        resampled: 0,
        unconverged: 0,
    };
    for r in results {
        let ((names, values, unconverged), redraws) = r?;
        if batch.names.is_empty() {
            batch.names = names;
            batch.values = vec![Vec::with_capacity(cfg.trials); values.len()];
        }
        for (col, v) in batch.values.iter_mut().zip(values) {
            col.push(v);
        }
        batch.resampled += redraws as u64;
        batch.unconverged += unconverged as u64;
    }
    Ok(batch)
}

fn run_table(cfg: &ExperimentConfig, eval: &TrialFn<'_>) -> Result<TableReport> {
    cfg.validate()?;
    let mut report = TableReport {
        experiment: cfg.experiment,
        rows: Vec::new(),
        trials: cfg.trials,
        resampled: 0,
        unconverged: 0,
    };
    for kind in &cfg.ensembles {
        for &n in &cfg.sizes {
            let batch = run_batch(cfg, *kind, n, eval)?;
            log::info!("{kind} n={n}: {} trials, {} redraws", cfg.trials, batch.resampled);
            for (name, values) in batch.names.iter().zip(&batch.values) {
                report.rows.push(SummaryRow::new(kind.name(), n, *name, values));
            }
            report.resampled += batch.resampled;
            report.unconverged += batch.unconverged;
        }
    }
    Ok(report)
}

/// `||A||_1`, `||A||_2`, their ratio, and the same for `A^{-1}`, plus the
/// Frobenius-norm variants, averaged per (ensemble, n).
pub fn run_table_norms(cfg: &ExperimentConfig) -> Result<TableReport> {
    run_table(cfg, &|m, stream| {
        let t = trial_norms(m, stream)?;
        Ok((NORM_METRICS.to_vec(), t.metrics().to_vec(), t.unconverged))
    })
}

/// Condition numbers: `κ_2` for general and circulant ensembles and `κ_1`
/// for Toeplitz-like ones unless `cfg.norm` says otherwise.
pub fn run_table_kappa(cfg: &ExperimentConfig) -> Result<TableReport> {
    run_table(cfg, &|m, stream| {
        let (names, values) = trial_kappa(m, cfg.norm, stream)?;
        Ok((names, values, 0))
    })
}
