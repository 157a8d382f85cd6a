//! The chi cdf and closed-form cdf bounds for extremal singular values of
//! Gaussian random matrices.
//!
//! Each bound evaluator returns a [`BoundValue`]: the raw formula value, the
//! value clamped to `[0, 1]`, and a flag marking it vacuous when the raw
//! value leaves that interval.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;
const FPMIN: f64 = 1e-300;

/// `ln Γ(a)` for `a > 0`. Exact recurrence from `Γ(1)` or `Γ(1/2)` when `2a`
/// is an integer (the chi case), Lanczos otherwise.
pub fn ln_gamma(a: f64) -> f64 {
    debug_assert!(a > 0.0);
    let twice = 2.0 * a;
    if twice.fract() == 0.0 && twice <= 2000.0 {
        let (mut x, mut acc) = if (twice as u64) % 2 == 0 {
            (1.0, 0.0)
        } else {
            (0.5, 0.5 * PI.ln())
        };
        while x < a {
            acc += x.ln();
            x += 1.0;
        }
        return acc;
    }
    lanczos_ln_gamma(a)
}

fn lanczos_ln_gamma(a: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if a < 0.5 {
        return (PI / (PI * a).sin()).ln() - lanczos_ln_gamma(1.0 - a);
    }
    let x = a - 1.0;
    let mut s = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + s.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`: series for `x < a + 1`,
/// Lentz continued fraction for the complement otherwise.
pub fn regularized_gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let log_prefix = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..GAMMA_MAX_ITER {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * GAMMA_EPS {
                break;
            }
        }
        (sum * log_prefix.exp()).min(1.0)
    } else {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..GAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = b + an / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < GAMMA_EPS {
                break;
            }
        }
        (1.0 - log_prefix.exp() * h).max(0.0)
    }
}

/// `χ_{0,1,n}(y)`, the cdf of the norm of a standard Gaussian `n`-vector.
pub fn chi_cdf(n: usize, y: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Usage("chi cdf needs n >= 1".into()));
    }
    if !(y >= 0.0) {
        return Err(Error::Usage(format!("chi cdf argument must be >= 0, got {y}")));
    }
    Ok(regularized_gamma_p(n as f64 / 2.0, y * y / 2.0))
}

/// `χ_{0,σ,n}(y) = χ_{0,1,n}(y/σ)`. Only the central case is defined.
pub fn chi_cdf_scaled(n: usize, mu: f64, sigma: f64, y: f64) -> Result<f64> {
    if mu != 0.0 {
        return Err(Error::Unsupported(
            "noncentral chi cdf (mu != 0) is not implemented".into(),
        ));
    }
    check_sigma(sigma)?;
    chi_cdf(n, y / sigma)
}

/// Whether the theoretical curve sits above or below the true cdf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `F(y) ≤ bound(y)`.
    Upper,
    /// `F(y) ≥ bound(y)`.
    Lower,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub raw: f64,
    pub value: f64,
    pub vacuous: bool,
}

impl BoundValue {
    pub fn new(raw: f64) -> Self {
        Self {
            raw,
            value: raw.clamp(0.0, 1.0),
            vacuous: !(0.0..=1.0).contains(&raw) || raw.is_nan(),
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Usage(format!("sigma must be positive, got {sigma}")))
    }
}

fn check_y(y: f64) -> Result<()> {
    if y >= 0.0 && y.is_finite() {
        Ok(())
    } else {
        Err(Error::Usage(format!("y must be finite and >= 0, got {y}")))
    }
}

/// Upper bound `2.35 √l y / σ` on `F_{σ_l(A-B)}(y)`.
pub fn bound_sv_general(l: usize, sigma: f64, y: f64) -> Result<BoundValue> {
    check_sigma(sigma)?;
    check_y(y)?;
    Ok(BoundValue::new(2.35 * (l as f64).sqrt() * y / sigma))
}

/// The same statement as a tail bound: `P{||(A-B)^+|| ≥ 2.35 x √l / σ} ≤ 1/x`.
pub fn sv_general_tail(x: f64) -> Result<BoundValue> {
    if !(x > 0.0) {
        return Err(Error::Usage("tail parameter must be positive".into()));
    }
    Ok(BoundValue::new(1.0 / x))
}

/// Lower bound `1 - exp(-(z - 2σ√h)^2 / (2σ^2))` on `F_{||A||}(z)`, stated
/// only for `z ≥ 2σ√h`.
pub fn bound_norm_general(h: usize, sigma: f64, z: f64) -> Result<BoundValue> {
    check_sigma(sigma)?;
    let edge = 2.0 * sigma * (h as f64).sqrt();
    if !(z >= edge) {
        return Err(Error::Domain(format!("z = {z} below 2 sigma sqrt(h) = {edge}")));
    }
    let d = z - edge;
    Ok(BoundValue::new(1.0 - (-d * d / (2.0 * sigma * sigma)).exp()))
}

/// Lower bound `1 - (14.1 + 4.7 √(2 ln y / n)) n / (y σ)` on `F_{κ(A)}(y)`
/// for `0 < σ ≤ 1`, `y ≥ 1`.
pub fn bound_kappa_general(n: usize, sigma: f64, y: f64) -> Result<BoundValue> {
    if n == 0 {
        return Err(Error::Usage("n must be positive".into()));
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::Usage(format!("sigma must lie in (0, 1], got {sigma}")));
    }
    if !(y >= 1.0) {
        return Err(Error::Usage(format!("y must be >= 1, got {y}")));
    }
    let nf = n as f64;
    let c = 14.1 + 4.7 * (2.0 * y.ln() / nf).sqrt();
    Ok(BoundValue::new(1.0 - c * nf / (y * sigma)))
}

/// Lower bound `χ_{μ,σ,2n-1}(y / √(2n-1))` on `F_{||T_n||}(y)`.
pub fn bound_toeplitz_norm(n: usize, mu: f64, sigma: f64, y: f64) -> Result<BoundValue> {
    check_y(y)?;
    if n == 0 {
        return Err(Error::Usage("n must be positive".into()));
    }
    let k = 2 * n - 1;
    Ok(BoundValue::new(chi_cdf_scaled(k, mu, sigma, y / (k as f64).sqrt())?))
}

/// Upper bound `√(2/π) y / σ` on `F_{|t^T b|}(y)` for unit `t`.
pub fn bound_inner_product(sigma: f64, y: f64) -> Result<BoundValue> {
    check_sigma(sigma)?;
    check_y(y)?;
    Ok(BoundValue::new((2.0 / PI).sqrt() * y / sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CirculantPart {
    /// Lower bound `χ_{μ,σ,n}(√(2/n) y)` on `F_{||T||}(y)`.
    Norm,
    /// Upper bound `√(2/π) n y / σ` on `F_{1/||T^{-1}||}(y)`.
    Inverse,
}

pub fn bound_circulant(
    n: usize,
    mu: f64,
    sigma: f64,
    y: f64,
    which: CirculantPart,
) -> Result<BoundValue> {
    check_y(y)?;
    check_sigma(sigma)?;
    if n == 0 {
        return Err(Error::Usage("n must be positive".into()));
    }
    let nf = n as f64;
    match which {
        CirculantPart::Norm => Ok(BoundValue::new(chi_cdf_scaled(
            n,
            mu,
            sigma,
            (2.0 / nf).sqrt() * y,
        )?)),
        CirculantPart::Inverse => Ok(BoundValue::new((2.0 / PI).sqrt() * nf * y / sigma)),
    }
}

/// The factor bounds behind `F_{1/||p_1 T^{-1}||}(y) ≤ 2n α β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToeplitzInverseBound {
    /// `√(2n/π) y / σ`, bounding both `F_α(y)` and `F_β(y)` from above,
    /// where `α = 1/||p||`, `β = 1/||q||`.
    pub factor: BoundValue,
    /// The multiplier `2n` in `||p_1 T^{-1}|| ≤ 2n ||p|| ||q||`.
    pub composite_scale: f64,
}

pub fn bound_toeplitz_inverse(n: usize, sigma: f64, y: f64) -> Result<ToeplitzInverseBound> {
    check_y(y)?;
    check_sigma(sigma)?;
    let nf = n as f64;
    Ok(ToeplitzInverseBound {
        factor: BoundValue::new((2.0 * nf / PI).sqrt() * y / sigma),
        composite_scale: 2.0 * nf,
    })
}

/// Stable identifiers of the checkable bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundName {
    SvGeneral,
    NormGeneral,
    KappaGeneral,
    ToeplitzNorm,
    InnerProduct,
    CirculantNorm,
    CirculantInv,
    ToeplitzInvFactors,
}

impl BoundName {
    pub const ALL: [BoundName; 8] = [
        BoundName::SvGeneral,
        BoundName::NormGeneral,
        BoundName::KappaGeneral,
        BoundName::ToeplitzNorm,
        BoundName::InnerProduct,
        BoundName::CirculantNorm,
        BoundName::CirculantInv,
        BoundName::ToeplitzInvFactors,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundName::SvGeneral => "sv_general",
            BoundName::NormGeneral => "norm_general",
            BoundName::KappaGeneral => "kappa_general",
            BoundName::ToeplitzNorm => "toeplitz_norm",
            BoundName::InnerProduct => "inner_product",
            BoundName::CirculantNorm => "circulant_norm",
            BoundName::CirculantInv => "circulant_inv",
            BoundName::ToeplitzInvFactors => "toeplitz_inv_factors",
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            BoundName::SvGeneral
            | BoundName::InnerProduct
            | BoundName::CirculantInv
            | BoundName::ToeplitzInvFactors => Direction::Upper,
            BoundName::NormGeneral
            | BoundName::KappaGeneral
            | BoundName::ToeplitzNorm
            | BoundName::CirculantNorm => Direction::Lower,
        }
    }
}

impl fmt::Display for BoundName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundName::ALL
            .into_iter()
            .find(|b| b.as_str() == s.trim())
            .ok_or_else(|| Error::Usage(format!("unknown bound {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_cdf_values() {
        assert_eq!(chi_cdf(3, 0.0).unwrap(), 0.0);
        assert!((chi_cdf(1, 1.0).unwrap() - 0.682_689_492_137).abs() < 1e-11);
        assert!((chi_cdf(2, 2.0).unwrap() - (1.0 - (-2f64).exp())).abs() < 1e-14);
        assert!((chi_cdf(2, 2.0).unwrap() - 0.864_664_716_8).abs() < 1e-10);
        assert!(chi_cdf(2, -1.0).is_err());
        assert!(chi_cdf(0, 1.0).is_err());
        assert!((chi_cdf(5, 60.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ln_gamma_paths_agree() {
        for a in [0.5, 1.0, 1.5, 4.0, 10.5, 31.5] {
            assert!((ln_gamma(a) - lanczos_ln_gamma(a)).abs() < 1e-12 * ln_gamma(a).abs().max(1.0), "{a}");
        }
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn direct_arithmetic_examples() {
        assert_eq!(bound_sv_general(100, 1.0, 0.0).unwrap().value, 0.0);
        assert!((bound_sv_general(100, 1.0, 0.01).unwrap().value - 0.235).abs() < 1e-15);
        assert!((sv_general_tail(10.0).unwrap().value - 0.1).abs() < 1e-15);
        assert_eq!(bound_norm_general(100, 1.0, 20.0).unwrap().value, 0.0);
        assert!((bound_norm_general(100, 1.0, 25.0).unwrap().value - 0.999_996_273).abs() < 1e-9);
        assert!(matches!(bound_norm_general(100, 1.0, 19.0), Err(Error::Domain(_))));
        let k = bound_kappa_general(100, 1.0, 1e6).unwrap();
        assert!((k.value - 0.998_343).abs() < 1e-6, "{}", k.value);
        let one = bound_kappa_general(3, 0.5, 1.0).unwrap();
        assert!(one.vacuous && (one.raw - (1.0 - 14.1 * 3.0 / 0.5)).abs() < 1e-12);
        assert!(bound_kappa_general(3, 2.0, 5.0).is_err());
        assert!((bound_inner_product(1.0, 0.1).unwrap().value - 0.079_788_456).abs() < 1e-8);
        let c = bound_circulant(256, 0.0, 1.0, 1e-4, CirculantPart::Inverse).unwrap();
        assert!((c.value - 0.020_426).abs() < 1e-6);
        assert_eq!(bound_circulant(8, 0.0, 1.0, 0.0, CirculantPart::Norm).unwrap().value, 0.0);
        let f = bound_toeplitz_inverse(50, 1.0, 0.01).unwrap();
        assert!((f.factor.value - 0.056_419).abs() < 1e-6);
        assert_eq!(f.composite_scale, 100.0);
    }

    #[test]
    fn toeplitz_norm_single_entry() {
        // n = 1: P(|t_0| ≤ y) = erf(y / √2)
        let b = bound_toeplitz_norm(1, 0.0, 1.0, 1.0).unwrap();
        assert!((b.value - 0.682_689_492_137).abs() < 1e-11);
        assert!(matches!(bound_toeplitz_norm(4, 1.0, 1.0, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn vacuous_flag() {
        let b = bound_sv_general(4, 1.0, 1.0).unwrap();
        assert!(b.vacuous && b.value == 1.0 && b.raw == 4.7);
    }

    #[test]
    fn names_round_trip() {
        for b in BoundName::ALL {
            assert_eq!(b.as_str().parse::<BoundName>().unwrap(), b);
        }
        assert!("nope".parse::<BoundName>().is_err());
    }
}
