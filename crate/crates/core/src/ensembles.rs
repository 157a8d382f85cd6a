//! Seeded random matrix populations.
//!
//! Every trial owns an independent ChaCha20 stream keyed by the experiment
//! seed and selected by the trial index, so a matrix depends only on
//! `(seed, trial_index, attempt)` and never on scheduling.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::structured::{FCirculantSpec, HankelSpec, StructuredMatrix, ToeplitzSpec};

/// Recorded in output headers.
pub const GENERATOR: &str =
    "chacha20 (rand_chacha 0.9); key=(seed,m,n,kind) as u64 LE words; stream=trial+attempt*2^40; \
     uniform=(u64>>11)*2^-53; normal=Box-Muller";

/// Resample attempts are placed this far apart in stream space.
const ATTEMPT_STRIDE: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Gaussian { mu: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Distribution {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() || !mu.is_finite() {
            return Err(Error::Usage(format!("invalid gaussian({mu}, {sigma})")));
        }
        Ok(Distribution::Gaussian { mu, sigma })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Usage(format!("invalid uniform({lo}, {hi})")));
        }
        Ok(Distribution::Uniform { lo, hi })
    }

    pub fn standard_normal() -> Self {
        Distribution::Gaussian { mu: 0.0, sigma: 1.0 }
    }

    /// Uniform on `[-1, 1)`, the table default.
    pub fn symmetric_uniform() -> Self {
        Distribution::Uniform { lo: -1.0, hi: 1.0 }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, Distribution::Gaussian { .. })
    }

    /// Analytic cdf, used by the goodness-of-fit tests.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Gaussian { mu, sigma } => 0.5 * erfc(-(x - mu) / (sigma * std::f64::consts::SQRT_2)),
            Distribution::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }
}

/// `erfc` through the regularized incomplete gamma in [`crate::bounds`].
fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 - crate::bounds::regularized_gamma_p(0.5, x * x)
    } else {
        1.0 + crate::bounds::regularized_gamma_p(0.5, x * x)
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Gaussian { mu, sigma } => write!(f, "gaussian:{mu},{sigma}"),
            Distribution::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    /// `gaussian:mu,sigma`, `uniform:lo,hi`, or a bare tag for the defaults.
    fn from_str(s: &str) -> Result<Self> {
        let (tag, params) = match s.split_once(':') {
            Some((t, p)) => (t, Some(p)),
            None => (s, None),
        };
        let pair = |p: &str| -> Result<(f64, f64)> {
            let (a, b) = p
                .split_once(',')
                .ok_or_else(|| Error::Usage(format!("expected two comma-separated numbers in {s:?}")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Usage(format!("bad number {v:?} in {s:?}")))
            };
            Ok((parse(a)?, parse(b)?))
        };
        match (tag.trim(), params) {
            ("gaussian" | "normal", None) => Ok(Self::standard_normal()),
            ("uniform", None) => Ok(Self::symmetric_uniform()),
            ("gaussian" | "normal", Some(p)) => {
                let (mu, sigma) = pair(p)?;
                Self::gaussian(mu, sigma)
            }
            ("uniform", Some(p)) => {
                let (lo, hi) = pair(p)?;
                Self::uniform(lo, hi)
            }
            _ => Err(Error::Usage(format!("unknown distribution {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixKind {
    General,
    Toeplitz,
    Hankel,
    Circulant,
    FCirculant(f64),
}

impl MatrixKind {
    pub fn name(&self) -> String {
        self.to_string()
    }

    /// Number of variates one draw consumes.
    /// Word mixed into the stream key so different populations under one
    /// seed draw from unrelated streams.
    pub fn key_word(&self) -> u64 {
        match self {
            MatrixKind::General => 1,
            MatrixKind::Toeplitz => 2,
            MatrixKind::Hankel => 3,
            MatrixKind::Circulant => 4,
            MatrixKind::FCirculant(f) => 5 ^ f.to_bits(),
        }
    }

    pub fn variates(&self, m: usize, n: usize) -> usize {
        match self {
            MatrixKind::General => m * n,
            MatrixKind::Toeplitz | MatrixKind::Hankel => m + n - 1,
            MatrixKind::Circulant | MatrixKind::FCirculant(_) => n,
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixKind::General => f.write_str("general"),
            MatrixKind::Toeplitz => f.write_str("toeplitz"),
            MatrixKind::Hankel => f.write_str("hankel"),
            MatrixKind::Circulant => f.write_str("circulant"),
            MatrixKind::FCirculant(v) => write!(f, "fcirculant:{v}"),
        }
    }
}

impl FromStr for MatrixKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "general" => Ok(MatrixKind::General),
            "toeplitz" => Ok(MatrixKind::Toeplitz),
            "hankel" => Ok(MatrixKind::Hankel),
            "circulant" => Ok(MatrixKind::Circulant),
            other => match other.strip_prefix("fcirculant:") {
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|f| f.is_finite())
                    .map(MatrixKind::FCirculant)
                    .ok_or_else(|| Error::Usage(format!("bad f in {other:?}"))),
                None => Err(Error::Usage(format!("unknown ensemble {other:?}"))),
            },
        }
    }
}

/// One random matrix population plus the trial selecting a member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub kind: MatrixKind,
    pub m: usize,
    pub n: usize,
    pub dist: Distribution,
    pub seed: u64,
    pub trial_index: u64,
}

impl EnsembleSpec {
    pub fn square(kind: MatrixKind, n: usize, dist: Distribution, seed: u64) -> Self {
        Self {
            kind,
            m: n,
            n,
            dist,
            seed,
            trial_index: 0,
        }
    }

    pub fn with_trial(mut self, trial_index: u64) -> Self {
        self.trial_index = trial_index;
        self
    }

    pub fn stream(&self, attempt: u32) -> TrialStream {
        TrialStream::keyed(
            [self.seed, self.m as u64, self.n as u64, self.kind.key_word()],
            self.trial_index,
            attempt,
        )
    }
}

/// A counted ChaCha20 stream with cached Box-Muller spare.
#[derive(Debug, Clone)]
pub struct TrialStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
    drawn: u64,
}

impl TrialStream {
    /// Stream keyed by `seed` alone.
    pub fn new(seed: u64, trial_index: u64, attempt: u32) -> Self {
        Self::keyed([seed, 0, 0, 0], trial_index, attempt)
    }

    pub fn keyed(words: [u64; 4], trial_index: u64, attempt: u32) -> Self {
        let mut key = [0u8; 32];
        for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(trial_index.wrapping_add(attempt as u64 * ATTEMPT_STRIDE));
        Self {
            rng,
            spare: None,
            drawn: 0,
        }
    }

    /// Scalar variates handed out so far.
    pub fn variates_drawn(&self) -> u64 {
        self.drawn
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    fn raw_uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform01(&mut self) -> f64 {
        self.drawn += 1;
        self.raw_uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.drawn += 1;
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.raw_uniform();
        let u2 = self.raw_uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn gaussian_variate(&mut self, mu: f64, sigma: f64) -> f64 {
        mu + sigma * self.standard_normal()
    }

    pub fn draw(&mut self, dist: &Distribution) -> f64 {
        match *dist {
            Distribution::Gaussian { mu, sigma } => self.gaussian_variate(mu, sigma),
            Distribution::Uniform { lo, hi } => lo + (hi - lo) * self.uniform01(),
        }
    }

    pub fn draw_vec(&mut self, dist: &Distribution, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.draw(dist)).collect()
    }
}

/// Draw a member of `kind` from an explicit stream.
pub fn sample_from(
    kind: MatrixKind,
    m: usize,
    n: usize,
    dist: &Distribution,
    stream: &mut TrialStream,
) -> Result<StructuredMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::Usage("ensemble dimensions must be positive".into()));
    }
    let square = || {
        if m == n {
            Ok(())
        } else {
            Err(Error::Usage(format!("{kind} ensemble must be square, got {m}x{n}")))
        }
    };
    let data = stream.draw_vec(dist, kind.variates(m, n));
    Ok(match kind {
        MatrixKind::General => StructuredMatrix::General(DenseMatrix::from_row_major(m, n, data)?),
        MatrixKind::Toeplitz => StructuredMatrix::Toeplitz(ToeplitzSpec::new(m, n, data)?),
        MatrixKind::Hankel => StructuredMatrix::Hankel(HankelSpec::new(m, n, data)?),
        MatrixKind::Circulant => {
            square()?;
            StructuredMatrix::FCirculant(FCirculantSpec::circulant(data)?)
        }
        MatrixKind::FCirculant(f) => {
            square()?;
            StructuredMatrix::FCirculant(FCirculantSpec::new(data, f)?)
        }
    })
}

/// The member selected by `spec` on its first attempt.
pub fn sample(spec: &EnsembleSpec) -> Result<StructuredMatrix> {
    sample_attempt(spec, 0)
}

pub fn sample_attempt(spec: &EnsembleSpec, attempt: u32) -> Result<StructuredMatrix> {
    sample_from(spec.kind, spec.m, spec.n, &spec.dist, &mut spec.stream(attempt))
}
