use serde::{Deserialize, Serialize};

/// One table line: statistics of a scalar observable over a trial batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub ensemble: String,
    pub n: usize,
    pub metric: String,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    /// Population standard deviation (divides by the batch size).
    pub std: f64,
}

pub const SUMMARY_COLUMNS: [&str; 7] = ["ensemble", "n", "metric", "min", "mean", "max", "std"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub std: f64,
}

/// Min, mean, max and population std. `values` must be non-empty.
pub fn summarize(values: &[f64]) -> Summary {
    assert!(!values.is_empty(), "summary of an empty batch");
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    // Rounding can push the mean a hair outside [min, max] for constant data.
    Summary {
        min,
        mean: mean.clamp(min, max),
        max,
        std: var.sqrt(),
    }
}

impl SummaryRow {
    pub fn new(ensemble: impl Into<String>, n: usize, metric: impl Into<String>, values: &[f64]) -> Self {
        let s = summarize(values);
        Self {
            ensemble: ensemble.into(),
            n,
            metric: metric.into(),
            min: s.min,
            mean: s.mean,
            max: s.max,
            std: s.std,
        }
    }
}

/// Empirical cdf `#(obs ≤ y) / N` over sorted observations.
pub fn empirical_cdf(sorted: &[f64], y: f64) -> f64 {
    sorted.partition_point(|v| *v <= y) as f64 / sorted.len() as f64
}

/// `sqrt(b (1 - b) / N)`.
pub fn binomial_se(b: f64, trials: usize) -> f64 {
    (b * (1.0 - b) / trials as f64).max(0.0).sqrt()
}

/// Least-squares slope of `y` on `x`.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
