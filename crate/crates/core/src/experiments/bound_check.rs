//! Monte Carlo validation of the probabilistic bounds.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    bound_circulant, bound_inner_product, bound_kappa_general, bound_norm_general, bound_sv_general,
    bound_toeplitz_inverse, bound_toeplitz_norm, BoundName, BoundValue, CirculantPart, Direction,
};
use crate::conditioning::{circulant_spectrum, norm2_power, DEFAULT_TOL, NORM_MAX_ITER};
use crate::dense::jacobi_svd;
use crate::ensembles::{sample_from, Distribution, EnsembleSpec, MatrixKind, TrialStream};
use crate::error::{Error, Result};
use crate::gs::{build_gs_a, GsInverse};
use crate::structured::{StructuredMatrix, ToeplitzOperator};

use super::config::{ExperimentConfig, Grid};
use super::parallel::{map_trials, with_resample};
use super::stats::{binomial_se, empirical_cdf};

/// Grid points whose bound is broken by more than this many standard errors
/// are `violated`.
pub const SE_SLACK: f64 = 3.0;

/// Default number of grid points.
pub const DEFAULT_GRID_STEPS: usize = 20;

/// Toeplitz norms up to this order come from Jacobi; larger ones from the
/// power method.
const TOEPLITZ_SVD_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Respected,
    Violated,
    Vacuous,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Respected => "respected",
            Verdict::Violated => "violated",
            Verdict::Vacuous => "vacuous",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "respected" => Ok(Verdict::Respected),
            "violated" => Ok(Verdict::Violated),
            "vacuous" => Ok(Verdict::Vacuous),
            _ => Err(Error::Format(format!("unknown verdict {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckRow {
    pub bound: String,
    pub n: usize,
    pub observable: String,
    pub params: String,
    pub y: f64,
    pub empirical: f64,
    /// The bound clamped to `[0, 1]`.
    pub theoretical: f64,
    /// The bound before clamping; empty when `y` lies outside its domain.
    pub raw: Option<f64>,
    pub se: f64,
    pub verdict: Verdict,
}

pub const BOUND_COLUMNS: [&str; 10] = [
    "bound",
    "n",
    "observable",
    "params",
    "y",
    "empirical",
    "theoretical",
    "raw",
    "se",
    "verdict",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheckReport {
    pub bound: BoundName,
    pub rows: Vec<BoundCheckRow>,
    pub trials: usize,
    pub resampled: u64,
}

impl BoundCheckReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.verdict == Verdict::Violated).count()
    }
}

/// Compare an empirical cdf value against a bound in `direction`.
pub fn verdict(direction: Direction, empirical: f64, bound: &BoundValue, se: f64) -> Verdict {
    if bound.vacuous {
        return Verdict::Vacuous;
    }
    let broken = match direction {
        Direction::Upper => empirical - bound.value,
        Direction::Lower => bound.value - empirical,
    };
    if broken > SE_SLACK * se {
        Verdict::Violated
    } else {
        Verdict::Respected
    }
}

fn gaussian_params(dist: &Distribution) -> Result<(f64, f64)> {
    match *dist {
        Distribution::Gaussian { mu, sigma } => Ok((mu, sigma)),
        Distribution::Uniform { .. } => Err(Error::Usage(format!(
            "bound checks assume Gaussian entries, got {dist}"
        ))),
    }
}

/// The ensemble sampled for `bound`. `inner_product` draws a plain vector.
fn bound_kind(bound: BoundName) -> Option<MatrixKind> {
    match bound {
        BoundName::SvGeneral | BoundName::NormGeneral | BoundName::KappaGeneral => Some(MatrixKind::General),
        BoundName::ToeplitzNorm | BoundName::ToeplitzInvFactors => Some(MatrixKind::Toeplitz),
        BoundName::CirculantNorm | BoundName::CirculantInv => Some(MatrixKind::Circulant),
        BoundName::InnerProduct => None,
    }
}

/// Names of the per-trial observables.
fn observables(bound: BoundName) -> &'static [&'static str] {
    match bound {
        BoundName::SvGeneral => &["sigma_min"],
        BoundName::NormGeneral | BoundName::ToeplitzNorm | BoundName::CirculantNorm => &["norm_2"],
        BoundName::KappaGeneral => &["kappa_2"],
        BoundName::InnerProduct => &["abs_inner"],
        BoundName::CirculantInv => &["inv_norm_2_recip"],
        BoundName::ToeplitzInvFactors => &["alpha", "beta"],
    }
}

/// The default 20-point grid for `bound` at order `n`, spanning the region
/// where the bound is informative.
pub fn default_grid(bound: BoundName, n: usize, sigma: f64) -> Result<Grid> {
    let nf = n as f64;
    let (lo, hi) = match bound {
        BoundName::SvGeneral => (0.0, sigma / (2.35 * nf.sqrt())),
        BoundName::NormGeneral => {
            let edge = 2.0 * sigma * nf.sqrt();
            (edge, edge + 4.0 * sigma)
        }
        BoundName::KappaGeneral => (20.0 * nf / sigma, 50.0 * 20.0 * nf / sigma),
        BoundName::ToeplitzNorm => {
            let c = (2.0 * nf - 1.0) * sigma;
            (0.5 * c, 1.5 * c)
        }
        BoundName::InnerProduct => (0.0, sigma * (PI / 2.0).sqrt()),
        BoundName::CirculantNorm => {
            let c = nf * sigma / 2f64.sqrt();
            (0.5 * c, 1.5 * c)
        }
        BoundName::CirculantInv => (0.0, sigma * (PI / 2.0).sqrt() / nf),
        BoundName::ToeplitzInvFactors => (0.0, sigma * (PI / (2.0 * nf)).sqrt()),
    };
    Grid::new(lo, hi, DEFAULT_GRID_STEPS)
}

/// The bound at `y`; a `y` outside the stated domain counts as vacuous.
fn theoretical(bound: BoundName, n: usize, mu: f64, sigma: f64, y: f64) -> Result<BoundValue> {
    let outside = BoundValue {
        raw: f64::NAN,
        value: match bound.direction() {
            Direction::Upper => 1.0,
            Direction::Lower => 0.0,
        },
        vacuous: true,
    };
    match bound {
        BoundName::SvGeneral => bound_sv_general(n, sigma, y),
        BoundName::NormGeneral => match bound_norm_general(n, sigma, y) {
            Err(Error::Domain(_)) => Ok(outside),
            r => r,
        },
        BoundName::KappaGeneral if y < 1.0 => Ok(outside),
        BoundName::KappaGeneral => bound_kappa_general(n, sigma, y),
        BoundName::ToeplitzNorm => bound_toeplitz_norm(n, mu, sigma, y),
        BoundName::InnerProduct => bound_inner_product(sigma, y),
        BoundName::CirculantNorm => bound_circulant(n, mu, sigma, y, CirculantPart::Norm),
        BoundName::CirculantInv => bound_circulant(n, mu, sigma, y, CirculantPart::Inverse),
        BoundName::ToeplitzInvFactors => Ok(bound_toeplitz_inverse(n, sigma, y)?.factor),
    }
}

fn check_parameters(bound: BoundName, mu: f64, sigma: f64) -> Result<()> {
    let centered_only = matches!(
        bound,
        BoundName::NormGeneral | BoundName::KappaGeneral | BoundName::ToeplitzNorm | BoundName::CirculantNorm
    );
    if centered_only && mu != 0.0 {
        return Err(Error::Unsupported(format!("{bound} is stated for mean zero, got mu = {mu}")));
    }
    if bound == BoundName::KappaGeneral && sigma > 1.0 {
        return Err(Error::Usage(format!("{bound} needs sigma <= 1, got {sigma}")));
    }
    Ok(())
}

fn general_singular_values(m: &StructuredMatrix) -> Result<Vec<f64>> {
    match m {
        StructuredMatrix::General(a) => jacobi_svd(a),
        _ => unreachable!("general ensemble"),
    }
}

fn observe(bound: BoundName, m: Option<&StructuredMatrix>, n: usize, dist: &Distribution, stream: &mut TrialStream) -> Result<Vec<f64>> {
    let m = match (bound, m) {
        (BoundName::InnerProduct, _) => {
            let b = stream.draw_vec(dist, n);
            let t: Vec<f64> = (0..n).map(|_| stream.standard_normal()).collect();
            let len = t.iter().map(|v| v * v).sum::<f64>().sqrt();
            if len == 0.0 {
                return Err(Error::DegeneratePivot {
                    name: "direction",
                    value: 0.0,
                    reference: 1.0,
                });
            }
            let dot: f64 = t.iter().zip(&b).map(|(a, b)| a * b).sum();
            return Ok(vec![(dot / len).abs()]);
        }
        (_, Some(m)) => m,
        (_, None) => unreachable!("matrix bounds sample a matrix"),
    };
    match bound {
        BoundName::SvGeneral => Ok(vec![*general_singular_values(m)?.last().unwrap()]),
        BoundName::NormGeneral => Ok(vec![general_singular_values(m)?[0]]),
        BoundName::KappaGeneral => {
            let s = general_singular_values(m)?;
            let lo = *s.last().unwrap();
            if lo == 0.0 {
                return Err(Error::Singular { step: n, pivot: 0.0 });
            }
            Ok(vec![s[0] / lo])
        }
        BoundName::ToeplitzNorm => {
            let StructuredMatrix::Toeplitz(t) = m else { unreachable!() };
            if n <= TOEPLITZ_SVD_LIMIT {
                Ok(vec![jacobi_svd(&t.to_dense()?)?[0]])
            } else {
                let start: Vec<f64> = (0..n).map(|_| stream.standard_normal()).collect();
                Ok(vec![norm2_power(&ToeplitzOperator::new(t), &start, NORM_MAX_ITER, DEFAULT_TOL)?.value])
            }
        }
        BoundName::CirculantNorm | BoundName::CirculantInv => {
            let StructuredMatrix::FCirculant(c) = m else { unreachable!() };
            let s = circulant_spectrum(c)?;
            Ok(vec![if bound == BoundName::CirculantNorm { s.sigma_max() } else { s.sigma_min() }])
        }
        BoundName::ToeplitzInvFactors => {
            let StructuredMatrix::Toeplitz(t) = m else { unreachable!() };
            let GsInverse::A(g) = build_gs_a(t)? else { unreachable!("part (a) builder") };
            let len = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            Ok(vec![1.0 / len(g.p()), 1.0 / len(g.q())])
        }
        BoundName::InnerProduct => unreachable!(),
    }
}

/// Sorted per-trial observables for one order, one column per observable.
fn sample_observables(cfg: &ExperimentConfig, bound: BoundName, n: usize) -> Result<(Vec<Vec<f64>>, u64)> {
    let kind = bound_kind(bound);
    // Vector draws share the keying of a 1 x n general sample.
    let spec = EnsembleSpec::square(kind.unwrap_or(MatrixKind::General), n, cfg.dist, cfg.seed);
    let spec = EnsembleSpec { m: if kind.is_some() { n } else { 1 }, ..spec };
    let results = map_trials(cfg.trials, cfg.jobs, |trial| {
        let spec = spec.with_trial(trial);
        with_resample(cfg.max_attempts, |attempt| {
            let mut stream = spec.stream(attempt);
            let m = match kind {
                Some(k) => Some(sample_from(k, n, n, &cfg.dist, &mut stream)?),
                None => None,
            };
            observe(bound, m.as_ref(), n, &cfg.dist, &mut stream)
        })
    })?;
    let names = observables(bound);
    let mut columns = vec![Vec::with_capacity(cfg.trials); names.len()];
    let mut resampled = 0u64;
    for r in results {
        let (values, redraws) = r?;
        resampled += redraws as u64;
        for (col, v) in columns.iter_mut().zip(values) {
            col.push(v);
        }
    }
    for col in &mut columns {
        col.sort_by(f64::total_cmp);
    }
    Ok((columns, resampled))
}

/// Check `bound` at every order in `cfg.sizes` over `grid` (a default grid
/// per order when `None`).
pub fn run_bound_check(cfg: &ExperimentConfig, bound: BoundName, grid: Option<&Grid>) -> Result<BoundCheckReport> {
    cfg.validate()?;
    let (mu, sigma) = gaussian_params(&cfg.dist)?;
    check_parameters(bound, mu, sigma)?;
    let mut report = BoundCheckReport {
        bound,
        rows: Vec::new(),
        trials: cfg.trials,
        resampled: 0,
    };
    for &n in &cfg.sizes {
        let points = match grid {
            Some(g) => g.points(),
            None => default_grid(bound, n, sigma)?.points(),
        };
        if points.iter().any(|y| *y < 0.0) {
            return Err(Error::Usage("grid points must be nonnegative".into()));
        }
        let (columns, resampled) = sample_observables(cfg, bound, n)?;
        report.resampled += resampled;
        log::info!("{bound} n={n}: {} trials, {resampled} redraws", cfg.trials);
        let params = format!("n={n};mu={mu};sigma={sigma}");
        for (name, sorted) in observables(bound).iter().zip(&columns) {
            for &y in &points {
                let b = theoretical(bound, n, mu, sigma, y)?;
                let empirical = empirical_cdf(sorted, y);
                let se = binomial_se(b.value, cfg.trials);
                report.rows.push(BoundCheckRow {
                    bound: bound.as_str().into(),
                    n,
                    observable: (*name).into(),
                    params: params.clone(),
                    y,
                    empirical,
                    theoretical: b.value,
                    raw: Some(b.raw).filter(|r| !r.is_nan()),
                    se,
                    verdict: verdict(bound.direction(), empirical, &b, se),
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::ExperimentKind;

    fn cfg(n: usize, trials: usize) -> ExperimentConfig {
        ExperimentConfig::new(ExperimentKind::BoundCheck, vec![], vec![n]).trials(trials)
    }

    #[test]
    fn verdict_directions() {
        let b = BoundValue::new(0.5);
        assert_eq!(verdict(Direction::Upper, 0.52, &b, 0.01), Verdict::Respected);
        assert_eq!(verdict(Direction::Upper, 0.54, &b, 0.01), Verdict::Violated);
        assert_eq!(verdict(Direction::Lower, 0.46, &b, 0.01), Verdict::Violated);
        assert_eq!(verdict(Direction::Lower, 0.9, &b, 0.01), Verdict::Respected);
        assert_eq!(verdict(Direction::Upper, 0.0, &BoundValue::new(1.7), 0.0), Verdict::Vacuous);
    }

    #[test]
    fn zero_grid_point() {
        let grid = Grid::new(0.0, 0.0, 1).unwrap();
        let r = run_bound_check(&cfg(8, 200), BoundName::CirculantInv, Some(&grid)).unwrap();
        let row = &r.rows[0];
        assert_eq!((row.empirical, row.theoretical, row.verdict), (0.0, 0.0, Verdict::Respected));
    }

    #[test]
    fn uniform_rejected() {
        let c = cfg(8, 10).dist(Distribution::symmetric_uniform());
        assert!(matches!(run_bound_check(&c, BoundName::SvGeneral, None), Err(Error::Usage(_))));
    }

    #[test]
    fn nonzero_mean_policy() {
        let c = cfg(8, 20).dist(Distribution::gaussian(1.0, 1.0).unwrap());
        assert!(matches!(run_bound_check(&c, BoundName::ToeplitzNorm, None), Err(Error::Unsupported(_))));
        let r = run_bound_check(&c, BoundName::InnerProduct, None).unwrap();
        assert_eq!(r.rows.len(), DEFAULT_GRID_STEPS);
    }

    #[test]
    fn factor_rows_per_observable() {
        let r = run_bound_check(&cfg(6, 50), BoundName::ToeplitzInvFactors, None).unwrap();
        assert_eq!(r.rows.len(), 2 * DEFAULT_GRID_STEPS);
        assert!(r.rows.iter().any(|row| row.observable == "beta"));
    }

    #[test]
    fn norm_general_below_edge_is_vacuous() {
        let grid = Grid::new(0.0, 1.0, 2).unwrap();
        let r = run_bound_check(&cfg(4, 20), BoundName::NormGeneral, Some(&grid)).unwrap();
        assert!(r.rows.iter().all(|row| row.verdict == Verdict::Vacuous));
    }
}
