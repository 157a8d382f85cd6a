//! Norms, extremal singular values and condition numbers, using structure
//! where possible.

use num_complex::Complex64;

use crate::dense::{jacobi_svd, LuFactor};
use crate::dft::DftPlan;
use crate::error::{check_len, Error, Result};
use crate::gs::pivot_ratios;
use crate::structured::{FCirculantSpec, LinearOperator, StructuredMatrix, ToeplitzSpec};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const NORM_MAX_ITER: usize = 2000;
pub const INVERSE_MAX_ITER: usize = 5000;

/// Relative threshold on `min |u_i| / max |u_i|` below which a circulant is
/// reported singular, scaled by `n`.
const CIRCULANT_SINGULAR_RTOL: f64 = f64::EPSILON;

/// Max absolute sums of consecutive windows of `len` entries, one per start
/// position `0..count`.
fn window_max(abs: &[f64], len: usize, count: usize) -> f64 {
    let mut sum: f64 = abs[..len].iter().sum();
    let mut best = sum;
    for s in 1..count {
        sum += abs[s + len - 1] - abs[s - 1];
        // Re-sum periodically so cancellation error does not accumulate.
        if s % 64 == 0 {
            sum = abs[s..s + len].iter().sum();
        }
        best = best.max(sum);
    }
    best
}

/// `||T||_1` from the diagonals: column `j` covers diagonal indices
/// `n-1-j ..= n-1-j+m-1`.
pub fn toeplitz_norm1(t: &ToeplitzSpec) -> f64 {
    toeplitz_norm_inf(&t.transpose())
}

/// `||T||_inf`: row `i` covers diagonal indices `i ..= i+n-1`.
pub fn toeplitz_norm_inf(t: &ToeplitzSpec) -> f64 {
    let abs: Vec<f64> = t.diagonals().iter().map(|v| v.abs()).collect();
    window_max(&abs, t.cols(), t.rows())
}

fn fcirculant_norms(c: &FCirculantSpec) -> (f64, f64) {
    let abs: Vec<f64> = c.column().iter().map(|v| v.abs()).collect();
    let n = abs.len();
    let af = c.f().abs();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + abs[i];
    }
    let total = prefix[n];
    // column j: v_0..v_{n-1-j} plain, v_{n-j}..v_{n-1} scaled by |f|
    let one = (0..n)
        .map(|j| prefix[n - j] + af * (total - prefix[n - j]))
        .fold(0.0, f64::max);
    // row i: v_0..v_i plain, v_{i+1}..v_{n-1} scaled by |f|
    let inf = (0..n)
        .map(|i| prefix[i + 1] + af * (total - prefix[i + 1]))
        .fold(0.0, f64::max);
    (one, inf)
}

/// `(||A||_1, ||A||_inf)` computed from the defining vectors.
pub fn norms_exact(a: &StructuredMatrix) -> (f64, f64) {
    match a {
        StructuredMatrix::General(d) => (d.norm1(), d.norm_inf()),
        StructuredMatrix::Toeplitz(t) => (toeplitz_norm1(t), toeplitz_norm_inf(t)),
        StructuredMatrix::Hankel(h) => {
            // Reversing columns does not change row or column sums.
            let (t, _) = h.to_toeplitz();
            (toeplitz_norm1(&t), toeplitz_norm_inf(&t))
        }
        StructuredMatrix::FCirculant(c) => fcirculant_norms(c),
    }
}

/// Result of a power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn normalize(x: &mut [f64]) -> f64 {
    let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
    s
}

/// Largest singular value of `op` by power iteration on `A^T A` from
/// `start`. The returned `||A x||` for unit `x` never exceeds `σ_1`.
pub fn norm2_power(
    op: &dyn LinearOperator,
    start: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<PowerEstimate> {
    check_len(op.ncols(), start.len())?;
    let mut x = start.to_vec();
    if normalize(&mut x) == 0.0 {
        return Err(Error::Usage("power iteration start vector is zero".into()));
    }
    let mut prev = 0.0;
    let mut value = 0.0;
    for it in 1..=max_iter {
        let y = op.apply(&x);
        value = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !value.is_finite() {
            return Err(Error::NonConvergence {
                what: "power iteration",
                iterations: it,
            });
        }
        if value == 0.0 {
            return Ok(PowerEstimate {
                value,
                iterations: it,
                converged: true,
            });
        }
        if it > 1 && (value - prev).abs() <= tol * value {
            return Ok(PowerEstimate {
                value,
                iterations: it,
                converged: true,
            });
        }
        prev = value;
        x = op.apply_transpose(&y);
        if normalize(&mut x) == 0.0 {
            return Ok(PowerEstimate {
                value,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(PowerEstimate {
        value,
        iterations: max_iter,
        converged: false,
    })
}

/// `σ_min(T) = 1 / ||T^{-1}||_2` by power iteration on `T^{-T} T^{-1}`,
/// with `inverse` applying `T^{-1}` and its transpose.
pub fn sigma_min_inverse_power(
    inverse: &dyn LinearOperator,
    start: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<PowerEstimate> {
    let est = norm2_power(inverse, start, max_iter, tol)?;
    if est.value == 0.0 {
        return Err(Error::Usage("inverse operator annihilated the iterate".into()));
    }
    Ok(PowerEstimate {
        value: 1.0 / est.value,
        ..est
    })
}

/// Dense LU wrapped as the operator `A^{-1}`.
pub struct LuInverse<'a>(pub &'a LuFactor);

impl LinearOperator for LuInverse<'_> {
    fn nrows(&self) -> usize {
        self.0.order()
    }
    fn ncols(&self) -> usize {
        self.0.order()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.solve(x).expect("length checked by caller")
    }
    fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        self.0.solve_transpose(x).expect("length checked by caller")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSummary {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub kappa2: f64,
    pub iterations_max: usize,
    pub iterations_min: usize,
    pub converged_max: bool,
    pub converged_min: bool,
}

impl SpectrumSummary {
    pub fn new(max: PowerEstimate, min: PowerEstimate) -> Self {
        let kappa2 = if min.value > 0.0 {
            max.value / min.value
        } else {
            f64::INFINITY
        };
        Self {
            sigma_max: max.value,
            sigma_min: min.value,
            kappa2,
            iterations_max: max.iterations,
            iterations_min: min.iterations,
            converged_max: max.converged,
            converged_min: min.converged,
        }
    }

    /// Exact summary from a full singular value list (descending).
    pub fn from_singular_values(s: &[f64]) -> Self {
        let exact = |value| PowerEstimate {
            value,
            iterations: 0,
            converged: true,
        };
        Self::new(exact(s[0]), exact(*s.last().expect("non-empty")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub one_norm: f64,
    pub inf_norm: f64,
    pub two_norm_estimate: f64,
    pub inv_one_norm_estimate: f64,
}

impl NormReport {
    pub fn kappa1(&self) -> f64 {
        self.one_norm * self.inv_one_norm_estimate
    }
}

fn sign_vector(y: &[f64]) -> Vec<f64> {
    y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect()
}

fn argmax_abs(z: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in z.iter().enumerate() {
        if v.abs() > z[best].abs() {
            best = i;
        }
    }
    best
}

/// Hager's estimator with Higham's refinements: a lower bound on
/// `||B||_1` from at most five sweeps of `B x` / `B^T x` products, where
/// `apply` and `apply_transpose` are `B` and `B^T`.
pub fn inv_norm1_estimate(
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    apply_transpose: &dyn Fn(&[f64]) -> Vec<f64>,
    n: usize,
) -> f64 {
    const MAX_SWEEPS: usize = 5;
    let norm1 = |v: &[f64]| v.iter().map(|a| a.abs()).sum::<f64>();
    let y = apply(&vec![1.0 / n as f64; n]);
    if n == 1 {
        return y[0].abs();
    }
    let mut est = norm1(&y);
    let mut xi = sign_vector(&y);
    let mut z = apply_transpose(&xi);
    let mut j = argmax_abs(&z);
    for _ in 1..MAX_SWEEPS {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let y = apply(&e);
        let old = est;
        est = norm1(&y);
        let new_xi = sign_vector(&y);
        if new_xi == xi || est <= old {
            est = est.max(old);
            break;
        }
        xi = new_xi;
        z = apply_transpose(&xi);
        let last = j;
        j = argmax_abs(&z);
        if z[last].abs() == z[j].abs() {
            break;
        }
    }
    let alt: Vec<f64> = (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * (1.0 + i as f64 / (n - 1) as f64)
        })
        .collect();
    let temp = 2.0 * norm1(&apply(&alt)) / (3.0 * n as f64);
    est.max(temp)
}

/// Exact spectrum of a circulant `Z_1(v)`: singular values `|Ω v|`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantSpectrum {
    /// `Ω v`, the eigenvalues.
    pub eigenvalues: Vec<Complex64>,
    /// `|Ω v|` sorted descending.
    pub singular_values: Vec<f64>,
    pub singular: bool,
}

impl CirculantSpectrum {
    pub fn kappa2(&self) -> f64 {
        if self.singular {
            f64::INFINITY
        } else {
            self.singular_values[0] / *self.singular_values.last().expect("non-empty")
        }
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values[0]
    }

    pub fn sigma_min(&self) -> f64 {
        *self.singular_values.last().expect("non-empty")
    }

    /// `||Z_1(v)^{-1}||_1`: the inverse is the circulant with first column
    /// `Ω^{-1}(1/u)`, whose column sums all equal that vector's 1-norm.
    pub fn inverse_norm1(&self) -> Result<f64> {
        if self.singular {
            return Err(Error::Singular {
                step: 0,
                pivot: self.sigma_min(),
            });
        }
        let plan = DftPlan::new(self.eigenvalues.len())?;
        let recip: Vec<Complex64> = self.eigenvalues.iter().map(|u| u.inv()).collect();
        let col = plan.inverse(&recip)?;
        Ok(col.iter().map(|z| z.re.abs()).sum())
    }

    /// Frobenius norm of the inverse, `sqrt(Σ 1/|u_i|^2)`.
    pub fn inverse_norm_fro(&self) -> f64 {
        if self.singular {
            return f64::INFINITY;
        }
        self.singular_values.iter().map(|s| 1.0 / (s * s)).sum::<f64>().sqrt()
    }
}

pub fn circulant_spectrum(c: &FCirculantSpec) -> Result<CirculantSpectrum> {
    if c.f() != 1.0 {
        return Err(Error::Usage(format!(
            "circulant spectrum needs f = 1, got {}",
            c.f()
        )));
    }
    let n = c.order();
    let plan = DftPlan::new(n)?;
    let x: Vec<Complex64> = c.column().iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let eigenvalues = plan.forward(&x)?;
    let mut s: Vec<f64> = eigenvalues.iter().map(|u| u.norm()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let singular = s[n - 1] <= n as f64 * CIRCULANT_SINGULAR_RTOL * s[0];
    Ok(CirculantSpectrum {
        eigenvalues,
        singular_values: s,
        singular,
    })
}

/// Comparison of `σ_j(Z_f(v))` against `σ_j(Z_1(v))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketReport {
    pub f: f64,
    pub n: usize,
    /// `max{|f|^2, 1/|f|^2}`.
    pub g_claimed: f64,
    /// Smallest `g` with `σ_j(Z_1)/g ≤ σ_j(Z_f) ≤ g σ_j(Z_1)` for all `j`.
    pub g_empirical: f64,
    pub holds: bool,
}

pub const BRACKET_ORDER_LIMIT: usize = 64;

pub fn fcirculant_bracket_check(v: &[f64], f: f64) -> Result<BracketReport> {
    let n = v.len();
    if f == 0.0 || !f.is_finite() {
        return Err(Error::Usage("bracket check needs a finite nonzero f".into()));
    }
    if n == 0 || n > BRACKET_ORDER_LIMIT {
        return Err(Error::Usage(format!(
            "bracket check limited to 1 ..= {BRACKET_ORDER_LIMIT}"
        )));
    }
    let zf = FCirculantSpec::new(v.to_vec(), f)?;
    let sf = jacobi_svd(&zf.to_dense()?)?;
    let s1 = circulant_spectrum(&FCirculantSpec::circulant(v.to_vec())?)?.singular_values;
    let scale = sf[0].max(s1[0]);
    let floor = scale * n as f64 * f64::EPSILON;
    let mut g: f64 = 1.0;
    for (a, b) in sf.iter().zip(&s1) {
        let (a, b) = (a.max(0.0), b.max(0.0));
        if a <= floor && b <= floor {
            continue;
        }
        if a <= floor || b <= floor {
            g = f64::INFINITY;
            break;
        }
        g = g.max(a / b).max(b / a);
    }
    let af = f.abs();
    let g_claimed = (af * af).max(1.0 / (af * af));
    Ok(BracketReport {
        f,
        n,
        g_claimed,
        g_empirical: g,
        holds: g <= g_claimed * (1.0 + 1e-12),
    })
}

/// Log-space check of the geometric-mean bound on leading-minor ratios and
/// of Hadamard's inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct HadamardReport {
    pub k: usize,
    pub t_bound: f64,
    /// `ln |det T_k|` from pivoted LU.
    pub log_abs_det: f64,
    /// The same from the unpivoted pivots.
    pub log_abs_det_pivots: f64,
    /// `ln` of `(|det T_k| / t)^{1/(k-1)}`, the mean with `T_1 = (t)`.
    pub log_geomean: f64,
    /// `ln` of `(|det T_k| / |t_0|)^{1/(k-1)}`, the mean of the actual ratios.
    pub log_geomean_raw: f64,
    /// `ln` of `k^{(1 + 1/(k-1))/2} t`.
    pub log_geomean_bound: f64,
    /// `ln` of `k^{k/2} t^k`.
    pub log_hadamard_bound: f64,
    pub geomean_holds: bool,
    pub hadamard_holds: bool,
}

impl HadamardReport {
    pub fn holds(&self) -> bool {
        self.geomean_holds && self.hadamard_holds
    }

    /// Disagreement between the two log-determinant routes.
    pub fn logdet_discrepancy(&self) -> f64 {
        (self.log_abs_det - self.log_abs_det_pivots).abs()
    }
}

pub fn hadamard_geomean_check(t: &ToeplitzSpec, t_bound: f64) -> Result<HadamardReport> {
    if !t.is_square() || t.rows() < 2 {
        return Err(Error::Usage("Hadamard check needs a square matrix of order >= 2".into()));
    }
    if !(t_bound > 0.0) || t.max_abs() > t_bound {
        return Err(Error::Usage("t_bound must dominate every entry".into()));
    }
    let k = t.rows();
    let ratios = pivot_ratios(t)?;
    let t0 = t.t(0).abs();
    let log_abs_det_pivots = t0.ln() + ratios.iter().map(|r| r.ln()).sum::<f64>();
    let log_abs_det = LuFactor::new(&t.to_dense()?)?.log_abs_det();
    let km1 = (k - 1) as f64;
    let lk = (k as f64).ln();
    let lt = t_bound.ln();
    let log_geomean = (log_abs_det - lt) / km1;
    let log_geomean_raw = (log_abs_det - t0.ln()) / km1;
    let log_geomean_bound = 0.5 * (1.0 + 1.0 / km1) * lk + lt;
    let log_hadamard_bound = 0.5 * k as f64 * lk + k as f64 * lt;
    let slack = |b: f64| 1e-12 * b.abs().max(1.0);
    Ok(HadamardReport {
        k,
        t_bound,
        log_abs_det,
        log_abs_det_pivots,
        log_geomean,
        log_geomean_raw,
        log_geomean_bound,
        log_hadamard_bound,
        geomean_holds: log_geomean <= log_geomean_bound + slack(log_geomean_bound),
        hadamard_holds: log_abs_det <= log_hadamard_bound + slack(log_hadamard_bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseMatrix;
    use crate::gs::{build_gs_a, GsInverse};

    #[test]
    fn circulant_norms_equal_v1() {
        let c = FCirculantSpec::circulant(vec![1.0, -2.0, 0.5]).unwrap();
        let (one, inf) = norms_exact(&StructuredMatrix::FCirculant(c));
        assert_eq!((one, inf), (3.5, 3.5));
        let i = StructuredMatrix::Toeplitz(ToeplitzSpec::identity(4).unwrap());
        assert_eq!(norms_exact(&i), (1.0, 1.0));
    }

    #[test]
    fn power_iteration_trivial() {
        let c = FCirculantSpec::circulant(vec![-3.0, 0.0, 0.0, 0.0]).unwrap();
        let m = StructuredMatrix::FCirculant(c);
        let e = norm2_power(m.operator().as_ref(), &[1.0, 0.2, 0.3, 0.4], 100, 1e-12).unwrap();
        assert!((e.value - 3.0).abs() < 1e-12 && e.converged);
        let i = DenseMatrix::identity(3);
        let e = norm2_power(&i, &[1.0, 1.0, 1.0], 10, 1e-12).unwrap();
        assert!((e.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_power_two_by_two() {
        let t = ToeplitzSpec::square(vec![1.0, 2.0, 1.0]).unwrap();
        let g: GsInverse = build_gs_a(&t).unwrap();
        let e = sigma_min_inverse_power(&g, &[1.0, 0.3], 500, 1e-14).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10, "{}", e.value);
        let g = build_gs_a(&ToeplitzSpec::square(vec![0.0, 0.0, 3.0, 0.0, 0.0]).unwrap()).unwrap();
        let e = sigma_min_inverse_power(&g, &[1.0, 2.0, 3.0], 50, 1e-14).unwrap();
        assert!((e.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn hager_trivial_cases() {
        let id = |x: &[f64]| x.to_vec();
        assert_eq!(inv_norm1_estimate(&id, &id, 5), 1.0);
        let inv = |x: &[f64]| x.iter().map(|v| v / -4.0).collect::<Vec<_>>();
        assert!((inv_norm1_estimate(&inv, &inv, 6) - 0.25).abs() < 1e-15);
        let d = DenseMatrix::from_row_major(2, 2, vec![1.0, -2.0, 3.0, 4.0]).unwrap();
        let a = |x: &[f64]| d.matvec(x).unwrap();
        let at = |x: &[f64]| d.matvec_transpose(x).unwrap();
        assert_eq!(inv_norm1_estimate(&a, &at, 2), 6.0);
    }

    #[test]
    fn circulant_spectrum_trivial() {
        let s = circulant_spectrum(&FCirculantSpec::circulant(vec![1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!(s.singular_values.iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert_eq!(s.kappa2(), 1.0);
        let ones = circulant_spectrum(&FCirculantSpec::circulant(vec![1.0; 4]).unwrap()).unwrap();
        assert!(ones.singular);
        assert!((ones.singular_values[0] - 4.0).abs() < 1e-15);
        assert!(ones.kappa2().is_infinite());
        assert!(circulant_spectrum(&FCirculantSpec::new(vec![1.0], 2.0).unwrap()).is_err());
    }

    #[test]
    fn circulant_inverse_norms() {
        let c = FCirculantSpec::circulant(vec![2.0, 1.0, 0.0, 0.5]).unwrap();
        let s = circulant_spectrum(&c).unwrap();
        let inv = crate::dense::dense_inverse(&c.to_dense().unwrap()).unwrap();
        assert!((s.inverse_norm1().unwrap() - inv.norm1()).abs() < 1e-13);
        assert!((s.inverse_norm_fro() - inv.norm_fro()).abs() < 1e-13);
    }

    #[test]
    fn bracket_trivial_cases() {
        let r = fcirculant_bracket_check(&[0.3, -1.0, 2.0, 0.1], 1.0).unwrap();
        assert!((r.g_empirical - 1.0).abs() < 1e-12 && r.holds);
        let r = fcirculant_bracket_check(&[1.0, 0.0, 0.0], 7.0).unwrap();
        assert!((r.g_empirical - 1.0).abs() < 1e-12);
        assert_eq!(r.g_claimed, 49.0);
    }

    #[test]
    fn hadamard_examples() {
        let r = hadamard_geomean_check(&ToeplitzSpec::identity(5).unwrap(), 1.0).unwrap();
        assert!(r.holds() && r.log_geomean.abs() < 1e-15);
        let t = ToeplitzSpec::square(vec![1.0, 1.0, -1.0]).unwrap();
        let r = hadamard_geomean_check(&t, 1.0).unwrap();
        assert!((r.log_abs_det - 2f64.ln()).abs() < 1e-15);
        assert!((r.log_hadamard_bound - 2f64.ln()).abs() < 1e-15);
        assert!(r.holds());
    }
}
