use std::fmt;
use std::str::FromStr;

use crate::ensembles::{Distribution, MatrixKind};
use crate::error::{Error, Result};

/// Default trials per size for the tables.
pub const DEFAULT_TRIALS: usize = 100;
/// Default trials for bound validation, where small-y cdf values need more samples.
pub const DEFAULT_BOUND_TRIALS: usize = 10_000;
/// Redraws allowed per trial before the experiment fails.
pub const DEFAULT_MAX_ATTEMPTS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    TableNorms,
    TableKappa,
    BoundCheck,
    Contrast,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::TableNorms => "table_norms",
            ExperimentKind::TableKappa => "table_kappa",
            ExperimentKind::BoundCheck => "bound_check",
            ExperimentKind::Contrast => "contrast",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which norm a condition number is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormChoice {
    One,
    Two,
}

impl FromStr for NormChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "one" => Ok(NormChoice::One),
            "2" | "two" => Ok(NormChoice::Two),
            other => Err(Error::Usage(format!("norm must be 1 or 2, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Usage(format!("format must be csv or json, got {other:?}"))),
        }
    }
}

/// Evenly spaced `y` values, parsed from `y0:y1:steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(start: f64, end: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !start.is_finite() || !end.is_finite() || end < start {
            return Err(Error::Usage(format!("invalid grid {start}:{end}:{steps}")));
        }
        if steps == 1 && start != end {
            return Err(Error::Usage("a one-point grid needs y0 == y1".into()));
        }
        Ok(Self { start, end, steps })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.end - self.start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.end } else { self.start + h * k as f64 })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Usage(format!("grid must be y0:y1:steps, got {s:?}")));
        }
        let f = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad grid value {v:?}")))
        };
        let steps = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Usage(format!("bad grid step count {:?}", parts[2])))?;
        Grid::new(f(parts[0])?, f(parts[1])?, steps)
    }
}

/// Parse a comma-separated size list such as `32,64,128`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Usage(format!("bad size {v:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub ensembles: Vec<MatrixKind>,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub dist: Distribution,
    pub seed: u64,
    /// `None` keeps each ensemble's customary norm.
    pub norm: Option<NormChoice>,
    pub jobs: usize,
    pub max_attempts: u32,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, ensembles: Vec<MatrixKind>, sizes: Vec<usize>) -> Self {
        let (trials, dist) = match experiment {
            ExperimentKind::BoundCheck => (DEFAULT_BOUND_TRIALS, Distribution::standard_normal()),
            _ => (DEFAULT_TRIALS, Distribution::symmetric_uniform()),
        };
        Self {
            experiment,
            ensembles,
            sizes,
            trials,
            dist,
            seed: 0,
            norm: None,
            jobs: 1,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }

    pub fn trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn dist(mut self, dist: Distribution) -> Self {
        self.dist = dist;
        self
    }

    pub fn jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self
    }

    pub fn norm(mut self, norm: Option<NormChoice>) -> Self {
        self.norm = norm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Usage("trials must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::Usage("size list is empty".into()));
        }
        if self.sizes.contains(&0) {
            return Err(Error::Usage("sizes must be positive".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Usage("sizes must be strictly increasing".into()));
        }
        if self.jobs == 0 {
            return Err(Error::Usage("jobs must be at least 1".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::Usage("max_attempts must be at least 1".into()));
        }
        Ok(())
    }
}
