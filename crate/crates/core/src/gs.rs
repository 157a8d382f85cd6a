//! Gohberg-Semencul representations of Toeplitz inverses.
//!
//! Every variant is stored in the common form
//!
//! ```text
//! scale * M = L(a1) U(b1) - L(a2) U(b2),   L(a) = Z(a),  U(b) = Z(b)^T,
//! ```
//!
//! where `M` is the inverse being represented. Applying `M` costs six FFTs
//! of length `2n` rounded up to a power of two. `M^T` comes for free by
//! exchanging the roles of `a` and `b`.
//!
//! * Part (a) uses `p = T^{-1} e_0`, `q = T^{-1} e_{n-1}` of `T` itself.
//! * Part (b) uses the first and last columns of `T_{n+1}^{-1}` and yields
//!   the inverse of the leading `n x n` block.
//! * Part (c) represents the inverse of the displaced block
//!   `T_{1,0} = (t_{i-j})`, rows `1..=n`, columns `0..n`. It is built by
//!   recovering the first and last columns of `T_{1,0}^{-1}` from columns of
//!   `T_{n+1}^{-1}` and then applying part (a) to `T_{1,0}`; see
//!   [`build_gs_bc`].

use num_complex::Complex64;

use crate::dense::{unpivoted_pivots, DenseMatrix, LuFactor};
use crate::dft::{to_complex, DftPlan};
use crate::error::{check_len, Error, Result};
use crate::structured::{LinearOperator, ToeplitzOperator, ToeplitzSpec};

/// Relative threshold below which the scalar pivot is declared degenerate.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Orders above this use a Levinson recursion plus iterative refinement for
/// the two column solves instead of dense LU.
pub const DENSE_SOLVE_LIMIT: usize = 512;

/// Backward-error ceiling for the construction-time probe.
pub const PROBE_TOLERANCE: f64 = 1e-6;

const REFINE_STEPS: usize = 6;

/// Prepared `L(a1)U(b1) - L(a2)U(b2)` with cached spectra.
#[derive(Debug, Clone)]
struct GsKernel {
    n: usize,
    scale: f64,
    a1: Vec<f64>,
    b1: Vec<f64>,
    a2: Vec<f64>,
    b2: Vec<f64>,
    plan: DftPlan,
    fa1: Vec<Complex64>,
    fb1: Vec<Complex64>,
    fa2: Vec<Complex64>,
    fb2: Vec<Complex64>,
}

impl GsKernel {
    fn new(scale: f64, a1: Vec<f64>, b1: Vec<f64>, a2: Vec<f64>, b2: Vec<f64>) -> Self {
        let n = a1.len();
        let len = (2 * n).next_power_of_two();
        let plan = DftPlan::new(len).expect("positive length");
        let spectrum = |v: &[f64]| {
            let mut buf = to_complex(v, len);
            plan.forward_in_place(&mut buf);
            buf
        };
        let (fa1, fb1, fa2, fb2) = (spectrum(&a1), spectrum(&b1), spectrum(&a2), spectrum(&b2));
        Self {
            n,
            scale,
            a1,
            b1,
            a2,
            b2,
            plan,
            fa1,
            fb1,
            fa2,
            fb2,
        }
    }

    /// `(L(x1)U(y1) - L(x2)U(y2)) v / scale` given spectra of the four vectors.
    fn product(
        &self,
        v: &[f64],
        fx1: &[Complex64],
        fy1: &[Complex64],
        fx2: &[Complex64],
        fy2: &[Complex64],
    ) -> Vec<f64> {
        let n = self.n;
        let len = self.plan.len();
        // U(y) v = Z(y)^T v: correlate, via convolution of y with J v.
        let mut jv = vec![Complex64::new(0.0, 0.0); len];
        for (i, x) in v.iter().enumerate() {
            jv[n - 1 - i].re = *x;
        }
        self.plan.forward_in_place(&mut jv);
        let mut u1: Vec<Complex64> = jv.iter().zip(fy1).map(|(a, b)| a * b).collect();
        let mut u2: Vec<Complex64> = jv.iter().zip(fy2).map(|(a, b)| a * b).collect();
        self.plan.inverse_in_place(&mut u1);
        self.plan.inverse_in_place(&mut u2);
        let mut w1 = vec![Complex64::new(0.0, 0.0); len];
        let mut w2 = vec![Complex64::new(0.0, 0.0); len];
        for i in 0..n {
            w1[i].re = u1[n - 1 - i].re;
            w2[i].re = u2[n - 1 - i].re;
        }
        self.plan.forward_in_place(&mut w1);
        self.plan.forward_in_place(&mut w2);
        for ((a, b), (s1, s2)) in w1.iter_mut().zip(&w2).zip(fx1.iter().zip(fx2)) {
            *a = *a * s1 - b * s2;
        }
        self.plan.inverse_in_place(&mut w1);
        w1[..n].iter().map(|z| z.re / self.scale).collect()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.product(v, &self.fa1, &self.fb1, &self.fa2, &self.fb2)
    }

    fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        self.product(v, &self.fb1, &self.fa1, &self.fb2, &self.fa2)
    }

    /// `(||M||_1, ||M||_F)` in O(n^2) time and O(n) memory, using
    /// `M_{i,j} = M_{i-1,j-1} + (a1_i b1_j - a2_i b2_j) / scale`, which
    /// follows from `L(a)U(b) - Z L(a)U(b) Z^T = a b^T`.
    fn norms_by_displacement(&self) -> (f64, f64) {
        let n = self.n;
        let s = 1.0 / self.scale;
        let mut row = vec![0.0; n];
        let mut colsum = vec![0.0; n];
        let mut fro = 0.0;
        for i in 0..n {
            let (x1, x2) = (self.a1[i] * s, self.a2[i] * s);
            for j in (0..n).rev() {
                let prev = if j > 0 { row[j - 1] } else { 0.0 };
                let v = prev + x1 * self.b1[j] - x2 * self.b2[j];
                row[j] = v;
                colsum[j] += v.abs();
                fro += v * v;
            }
        }
        (colsum.into_iter().fold(0.0, f64::max), fro.sqrt())
    }

    /// Dense `M` assembled from explicit triangular Toeplitz factors.
    fn to_dense(&self) -> Result<DenseMatrix> {
        let lower = |v: &[f64]| DenseMatrix::from_fn(self.n, self.n, |i, j| if i >= j { v[i - j] } else { 0.0 });
        let first = lower(&self.a1).matmul(&lower(&self.b1).transpose())?;
        let second = lower(&self.a2).matmul(&lower(&self.b2).transpose())?;
        Ok(first.sub(&second)?.scale(1.0 / self.scale))
    }
}

fn reversed(v: &[f64]) -> Vec<f64> {
    v.iter().rev().copied().collect()
}

/// `Z v`: shift down by one, dropping the last entry.
fn shifted(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    out[1..].copy_from_slice(&v[..v.len() - 1]);
    out
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// Part (a): `p1 T^{-1} = Z(p) Z(Jq)^T - Z(Zq) Z(ZJp)^T`.
#[derive(Debug, Clone)]
pub struct GsInverseA {
    p: Vec<f64>,
    q: Vec<f64>,
    kernel: GsKernel,
}

impl GsInverseA {
    /// Assemble from the two solve vectors without re-solving.
    pub fn from_columns(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        check_len(p.len(), q.len())?;
        if p.is_empty() {
            return Err(Error::Usage("empty GS columns".into()));
        }
        let p1 = p[0];
        let reference = norm2(&p);
        if !(p1.abs() > PIVOT_TOLERANCE * reference) {
            return Err(Error::DegeneratePivot {
                name: "p1",
                value: p1.abs(),
                reference,
            });
        }
        let kernel = GsKernel::new(
            p1,
            p.clone(),
            reversed(&q),
            shifted(&q),
            shifted(&reversed(&p)),
        );
        Ok(Self { p, q, kernel })
    }

    pub fn order(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p1(&self) -> f64 {
        self.p[0]
    }
}

/// Which of the two `T_{n+1}`-based representations is held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsPart {
    /// Inverse of the leading block `T_n`, pivot `v_0`.
    B,
    /// Inverse of the displaced block `T_{1,0}`, pivot `v_n`.
    C,
}

/// Parts (b) and (c), built from `v̂ = T_{n+1}^{-1} e_0`, `ŵ = T_{n+1}^{-1} e_n`.
#[derive(Debug, Clone)]
pub struct GsInverseBC {
    which: GsPart,
    vhat: Vec<f64>,
    what: Vec<f64>,
    /// `T_{n+1}^{-1} e_1`, only needed for part (c).
    aux: Option<Vec<f64>>,
    kernel: GsKernel,
}

impl GsInverseBC {
    pub fn order(&self) -> usize {
        self.vhat.len() - 1
    }

    pub fn which(&self) -> GsPart {
        self.which
    }

    pub fn vhat(&self) -> &[f64] {
        &self.vhat
    }

    pub fn what(&self) -> &[f64] {
        &self.what
    }

    pub fn aux(&self) -> Option<&[f64]> {
        self.aux.as_deref()
    }

    /// The scalar the representation is normalized by: `v_0` for part (b),
    /// `v_n` for part (c).
    pub fn pivot(&self) -> f64 {
        match self.which {
            GsPart::B => self.vhat[0],
            GsPart::C => self.vhat[self.order()],
        }
    }
}

#[derive(Debug, Clone)]
pub enum GsInverse {
    A(GsInverseA),
    BC(GsInverseBC),
}

impl GsInverse {
    fn kernel(&self) -> &GsKernel {
        match self {
            GsInverse::A(g) => &g.kernel,
            GsInverse::BC(g) => &g.kernel,
        }
    }

    pub fn order(&self) -> usize {
        self.kernel().n
    }

    /// `M x` where `M` is the represented inverse.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.order(), x.len())?;
        Ok(self.kernel().apply(x))
    }

    /// `M^T x`.
    pub fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.order(), x.len())?;
        Ok(self.kernel().apply_transpose(x))
    }

    /// Exact `(||M||_1, ||M||_F)` without forming `M`; O(n^2).
    pub fn norms_exact(&self) -> (f64, f64) {
        self.kernel().norms_by_displacement()
    }

    /// Dense reconstruction from explicit triangular factors (tests only; O(n^3)).
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        self.kernel().to_dense()
    }
}

impl From<GsInverseA> for GsInverse {
    fn from(g: GsInverseA) -> Self {
        GsInverse::A(g)
    }
}

impl From<GsInverseBC> for GsInverse {
    fn from(g: GsInverseBC) -> Self {
        GsInverse::BC(g)
    }
}

impl LinearOperator for GsInverse {
    fn nrows(&self) -> usize {
        self.order()
    }
    fn ncols(&self) -> usize {
        self.order()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.order());
        self.kernel().apply(x)
    }
    fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.order());
        self.kernel().apply_transpose(x)
    }
}

/// `T^{-1} x` through the part (a) representation.
pub fn apply_gs(g: &GsInverse, x: &[f64]) -> Result<Vec<f64>> {
    g.apply(x)
}

/// Deterministic probe vector with entries in `[-1, 1)`.
fn probe_vector(n: usize) -> Vec<f64> {
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15 ^ n as u64;
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}

/// Backward error `||x - T y||_1 / (||T||_1 ||y||_1)` for `y = M x`.
fn probe(t: &ToeplitzSpec, op: &ToeplitzOperator, g: &GsInverse) -> Result<()> {
    let n = t.rows();
    let x = probe_vector(n);
    let y = g.apply(&x)?;
    let r: Vec<f64> = x.iter().zip(op.apply(&y)).map(|(a, b)| a - b).collect();
    let t1 = crate::conditioning::toeplitz_norm1(t);
    let eta = norm1(&r) / (t1 * norm1(&y));
    if eta.is_finite() && eta <= PROBE_TOLERANCE {
        Ok(())
    } else {
        Err(Error::Probe(format!(
            "GS probe backward error {eta:e} exceeds {PROBE_TOLERANCE:e} at n = {n}"
        )))
    }
}

/// Forward and backward Levinson vectors: `T^{-1} e_0` and `T^{-1} e_{n-1}`.
/// Requires every leading block to be nonsingular.
fn levinson_columns(t: &ToeplitzSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = t.rows();
    let t0 = t.t(0);
    let scale = t.max_abs();
    if t0.abs() <= PIVOT_TOLERANCE * scale {
        return Err(Error::DegenerateMinor { order: 1 });
    }
    let mut f = vec![1.0 / t0];
    let mut b = vec![1.0 / t0];
    f.reserve(n);
    b.reserve(n);
    for k in 1..n {
        // Row k of T_{k+1} against [f; 0] and row 0 against [0; b].
        let ef: f64 = f.iter().enumerate().map(|(j, fj)| t.t((k - j) as isize) * fj).sum();
        let eb: f64 = b
            .iter()
            .enumerate()
            .map(|(j, bj)| t.t(-((j + 1) as isize)) * bj)
            .sum();
        let d = 1.0 - ef * eb;
        if !(d.abs() > 1e-12) || !d.is_finite() {
            return Err(Error::DegenerateMinor { order: k + 1 });
        }
        let mut nf = Vec::with_capacity(n);
        let mut nb = Vec::with_capacity(n);
        for i in 0..=k {
            let fi = if i < k { f[i] } else { 0.0 };
            let bi = if i > 0 { b[i - 1] } else { 0.0 };
            nf.push((fi - ef * bi) / d);
            nb.push((bi - eb * fi) / d);
        }
        f = nf;
        b = nb;
    }
    Ok((f, b))
}

/// Improve `p` and `q` by `x += G (e - T x)` with `G` rebuilt from the
/// current columns each step.
fn refine_columns(
    t: &ToeplitzSpec,
    op: &ToeplitzOperator,
    mut p: Vec<f64>,
    mut q: Vec<f64>,
) -> Result<GsInverseA> {
    let n = t.rows();
    let t1 = crate::conditioning::toeplitz_norm1(t);
    let residual = |x: &[f64], k: usize| -> Vec<f64> {
        let tx = op.apply(x);
        let mut r: Vec<f64> = tx.iter().map(|v| -v).collect();
        r[k] += 1.0;
        r
    };
    let mut g = GsInverseA::from_columns(p.clone(), q.clone())?;
    let mut last = f64::INFINITY;
    for _ in 0..REFINE_STEPS {
        let rp = residual(&p, 0);
        let rq = residual(&q, n - 1);
        let eta = (norm1(&rp) / norm1(&p)).max(norm1(&rq) / norm1(&q)) / t1;
        if !eta.is_finite() {
            break;
        }
        if eta <= 4.0 * f64::EPSILON * n as f64 || eta >= 0.5 * last {
            break;
        }
        last = eta;
        for (x, d) in p.iter_mut().zip(g.kernel.apply(&rp)) {
            *x += d;
        }
        for (x, d) in q.iter_mut().zip(g.kernel.apply(&rq)) {
            *x += d;
        }
        g = GsInverseA::from_columns(p.clone(), q.clone())?;
    }
    Ok(g)
}

fn build_dense_a(t: &ToeplitzSpec) -> Result<GsInverseA> {
    let n = t.rows();
    let lu = LuFactor::new(&t.to_dense()?)?;
    let p = lu.solve(&unit(n, 0))?;
    let q = lu.solve(&unit(n, n - 1))?;
    GsInverseA::from_columns(p, q)
}

/// Part (a) for a square Toeplitz `T`.
///
/// Orders up to [`DENSE_SOLVE_LIMIT`] solve for `p`, `q` by dense LU with
/// partial pivoting. Larger orders start from the Levinson columns and
/// refine them through the GS representation itself, falling back to dense
/// LU if the recursion breaks down. Either way the result must pass a
/// random-probe backward-error check.
pub fn build_gs_a(t: &ToeplitzSpec) -> Result<GsInverse> {
    if !t.is_square() {
        return Err(Error::Usage("GS inversion needs a square Toeplitz matrix".into()));
    }
    let n = t.rows();
    let op = ToeplitzOperator::new(t);
    let g: GsInverse = if n <= DENSE_SOLVE_LIMIT {
        build_dense_a(t)?.into()
    } else {
        let fast = levinson_columns(t)
            .and_then(|(p, q)| refine_columns(t, &op, p, q))
            .map(GsInverse::from)
            .and_then(|g| probe(t, &op, &g).map(|_| g));
        match fast {
            Ok(g) => return Ok(g),
            Err(e) => {
                log::debug!("fast GS columns failed at n = {n} ({e}); using dense LU");
                build_dense_a(t)?.into()
            }
        }
    };
    probe(t, &op, &g)?;
    Ok(g)
}

/// Parts (b) and (c) from an `(n+1) x (n+1)` Toeplitz `T_ext`.
///
/// For part (c) the first and last columns of `T_{1,0}^{-1}` follow from
/// the fact that rows `1..=n` of `T_ext v̂` vanish: if `x = T_ext^{-1} e_{j+1}`
/// then `x - (x_n / v_n) v̂`, truncated to its first `n` entries, is
/// `T_{1,0}^{-1} e_j`. This needs `x = T_ext^{-1} e_1` in addition to `ŵ`.
pub fn build_gs_bc(t_ext: &ToeplitzSpec, which: GsPart) -> Result<GsInverse> {
    if !t_ext.is_square() || t_ext.rows() < 2 {
        return Err(Error::Usage(
            "GS parts (b), (c) need a square Toeplitz matrix of order at least 2".into(),
        ));
    }
    let n1 = t_ext.rows();
    let n = n1 - 1;
    let lu = LuFactor::new(&t_ext.to_dense()?)?;
    let vhat = lu.solve(&unit(n1, 0))?;
    let what = lu.solve(&unit(n1, n))?;
    let reference = norm2(&vhat);
    let (pivot, name) = match which {
        GsPart::B => (vhat[0], "v0"),
        GsPart::C => (vhat[n], "vn"),
    };
    if !(pivot.abs() > PIVOT_TOLERANCE * reference) {
        return Err(Error::DegeneratePivot {
            name,
            value: pivot.abs(),
            reference,
        });
    }
    let (aux, kernel, target) = match which {
        GsPart::B => {
            // v0 T_n^{-1} = Z(v) Z(J w')^T - Z(w) Z(J v')^T
            let v = vhat[..n].to_vec();
            let w = what[..n].to_vec();
            let kernel = GsKernel::new(
                vhat[0],
                v,
                reversed(&what[1..]),
                w,
                reversed(&vhat[1..]),
            );
            (None, kernel, t_ext.leading(n)?)
        }
        GsPart::C => {
            let x = lu.solve(&unit(n1, 1))?;
            let column = |src: &[f64]| -> Vec<f64> {
                let c = src[n] / vhat[n];
                (0..n).map(|i| src[i] - c * vhat[i]).collect()
            };
            let pc = column(&x);
            let qc = column(&what);
            let a = GsInverseA::from_columns(pc, qc)?;
            (Some(x), a.kernel, t_ext.block(1, 0, n, n)?)
        }
    };
    let g = GsInverse::BC(GsInverseBC {
        which,
        vhat,
        what,
        aux,
        kernel,
    });
    probe(&target, &ToeplitzOperator::new(&target), &g)?;
    Ok(g)
}

/// `|det T_{h+1} / det T_h|` for `h = 1..n-1`, i.e. the absolute unpivoted
/// LU pivots after the first.
pub fn pivot_ratios(t: &ToeplitzSpec) -> Result<Vec<f64>> {
    if !t.is_square() {
        return Err(Error::Usage("pivot ratios need a square matrix".into()));
    }
    let pivots = unpivoted_pivots(&t.to_dense()?)?;
    Ok(pivots[1..].iter().map(|d| d.abs()).collect())
}
