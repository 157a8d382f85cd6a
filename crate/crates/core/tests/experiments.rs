use condlab::bounds::BoundName;
use condlab::ensembles::{Distribution, MatrixKind, TrialStream};
use condlab::experiments::tables::trial_norms;
use condlab::structured::{HankelSpec, StructuredMatrix};
use condlab::experiments::emit::{parse_csv, to_csv, OutputMeta};
use condlab::experiments::stats::regression_slope;
use condlab::experiments::{
    run_bound_check, run_contrast, run_table_kappa, run_table_norms, ExperimentConfig, ExperimentKind, SummaryRow,
    Verdict,
};

fn mean(rows: &[SummaryRow], ensemble: &str, n: usize, metric: &str) -> f64 {
    rows.iter()
        .find(|r| r.ensemble == ensemble && r.n == n && r.metric == metric)
        .unwrap_or_else(|| panic!("no row {ensemble} {n} {metric}"))
        .mean
}

#[test]
fn tables_do_not_depend_on_jobs() {
    let kinds = vec![MatrixKind::General, MatrixKind::Toeplitz, MatrixKind::Hankel, MatrixKind::Circulant];
    let base = ExperimentConfig::new(ExperimentKind::TableNorms, kinds, vec![3, 16, 40]).trials(12).seed(5);
    let a = run_table_norms(&base.clone().jobs(1)).unwrap();
    let b = run_table_norms(&base.clone().jobs(4)).unwrap();
    assert_eq!(a, b);
    let meta = OutputMeta::new("table_norms", 5, 12, "uniform:-1,1", a.resampled);
    assert_eq!(to_csv(&meta, &a.rows).unwrap(), to_csv(&meta, &b.rows).unwrap());

    let k = ExperimentConfig { experiment: ExperimentKind::TableKappa, ..base };
    assert_eq!(run_table_kappa(&k.clone().jobs(1)).unwrap(), run_table_kappa(&k.jobs(3)).unwrap());
}

#[test]
fn every_requested_trial_is_summarized() {
    let cfg = ExperimentConfig::new(ExperimentKind::TableKappa, vec![MatrixKind::Toeplitz], vec![2, 5]).trials(37);
    let r = run_table_kappa(&cfg).unwrap();
    assert_eq!(r.trials, 37);
    // kappa_1 and kappa_1_exact per size.
    assert_eq!(r.rows.len(), 4);
    assert!(r.rows.iter().all(|row| row.min <= row.mean && row.mean <= row.max));
}

#[test]
fn seeds_change_results() {
    let cfg = ExperimentConfig::new(ExperimentKind::TableNorms, vec![MatrixKind::Circulant], vec![8]).trials(5);
    let a = run_table_norms(&cfg.clone().seed(1)).unwrap();
    let b = run_table_norms(&cfg.seed(2)).unwrap();
    assert_ne!(a.rows, b.rows);
}

#[test]
fn hankel_and_toeplitz_agree_in_norms() {
    // H = T J: a Hankel matrix and its column reversal share every norm.
    let mut s = TrialStream::new(9, 0, 0);
    let data = s.draw_vec(&Distribution::symmetric_uniform(), 17);
    let h = HankelSpec::new(9, 9, data).unwrap();
    let t = h.to_toeplitz().0;
    let a = trial_norms(&StructuredMatrix::Hankel(h), &mut TrialStream::new(1, 0, 0)).unwrap();
    let b = trial_norms(&StructuredMatrix::Toeplitz(t.clone()), &mut TrialStream::new(1, 0, 0)).unwrap();
    assert_eq!(a, b);
    let d = t.to_dense().unwrap();
    assert!((a.norm1 - d.norm1()).abs() < 1e-13 && (a.norm_fro - d.norm_fro()).abs() < 1e-13);
}

#[test]
fn frobenius_ratios_near_table_values() {
    // Entries uniform on (-1, 1): ||A||_F ≈ n / √3 and ||A||_1 ≈ n/2 + O(√n).
    let cfg = ExperimentConfig::new(ExperimentKind::TableNorms, vec![MatrixKind::General, MatrixKind::Circulant], vec![64])
        .trials(20);
    let r = run_table_norms(&cfg).unwrap();
    let g = mean(&r.rows, "general", 64, "ratio_1_fro");
    assert!((0.85..1.05).contains(&g), "{g}");
    let c = mean(&r.rows, "circulant", 64, "ratio_1_fro");
    assert!((0.8..0.95).contains(&c), "{c}");
}

#[test]
fn circulant_kappa_grows_slowly() {
    let sizes = vec![64, 256, 1024, 4096];
    let cfg = ExperimentConfig::new(ExperimentKind::TableKappa, vec![MatrixKind::Circulant], sizes.clone()).trials(30);
    let r = run_table_kappa(&cfg).unwrap();
    let x: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = sizes.iter().map(|&n| mean(&r.rows, "circulant", n, "kappa_2").ln()).collect();
    assert!(regression_slope(&x, &y) < 1.2);
}

#[test]
fn small_bound_checks_respected() {
    for (bound, n) in [
        (BoundName::SvGeneral, 8),
        (BoundName::CirculantInv, 16),
        (BoundName::InnerProduct, 10),
        (BoundName::ToeplitzNorm, 8),
        (BoundName::ToeplitzInvFactors, 8),
        (BoundName::CirculantNorm, 16),
        (BoundName::NormGeneral, 8),
    ] {
        let cfg = ExperimentConfig::new(ExperimentKind::BoundCheck, vec![], vec![n]).trials(2000).seed(3);
        let r = run_bound_check(&cfg, bound, None).unwrap();
        assert_eq!(r.violations(), 0, "{bound}");
        assert!(r.rows.iter().any(|row| row.verdict == Verdict::Respected), "{bound}");
    }
}

#[test]
fn bound_check_is_deterministic_across_jobs() {
    let cfg = ExperimentConfig::new(ExperimentKind::BoundCheck, vec![], vec![6]).trials(300);
    let a = run_bound_check(&cfg.clone().jobs(1), BoundName::ToeplitzInvFactors, None).unwrap();
    let b = run_bound_check(&cfg.jobs(2), BoundName::ToeplitzInvFactors, None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn contrast_random_toeplitz_is_mild() {
    let cfg = ExperimentConfig::new(ExperimentKind::Contrast, vec![MatrixKind::Toeplitz], vec![8])
        .trials(100)
        .dist(Distribution::symmetric_uniform());
    let rows = run_contrast(&cfg).unwrap();
    assert!(mean(&rows, "toeplitz", 8, "kappa_2") < 1e4);
    assert!(mean(&rows, "shift_toeplitz", 8, "kappa_2") > mean(&rows, "toeplitz", 8, "kappa_2"));
}

#[test]
fn csv_output_roundtrips_through_parser() {
    let cfg = ExperimentConfig::new(ExperimentKind::TableKappa, vec![MatrixKind::General], vec![4, 8]).trials(6);
    let r = run_table_kappa(&cfg).unwrap();
    let text = to_csv(&OutputMeta::new("table_kappa", 0, 6, "uniform:-1,1", r.resampled), &r.rows).unwrap();
    assert_eq!(parse_csv::<SummaryRow>(&text).unwrap(), r.rows);
}
