//! Dense reference routines: LU with partial pivoting, one-sided Jacobi SVD,
//! unpivoted elimination pivots and exact norms. These are the oracles that
//! fast structured paths are checked against, so nothing here calls into
//! the FFT or Gohberg-Semencul code.

use std::ops::{Index, IndexMut};

use crate::error::{check_finite, check_len, Error, Result};
use crate::structured::LinearOperator;

/// Pivots smaller than this (absolute) are treated as exact singularity.
pub const SINGULAR_PIVOT: f64 = 1e-300;

/// Jacobi sweeps before giving up.
pub const JACOBI_MAX_SWEEPS: usize = 80;

/// Largest order for which the Jacobi oracle is run on request.
pub const SVD_ORDER_LIMIT: usize = 1024;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = 1.0;
        }
        a
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut a = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                a[(i, j)] = f(i, j);
            }
        }
        a
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        Ok(self.mul_vec(x))
    }

    fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn mul_vec_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            for (yj, a) in y.iter_mut().zip(self.row(i)) {
                *yj += a * xi;
            }
        }
        y
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, x.len())?;
        Ok(self.mul_vec_transpose(x))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        check_len(self.cols, other.rows)?;
        let mut c = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut c.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(c)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        check_len(self.rows, other.rows)?;
        check_len(self.cols, other.cols)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Max absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|a| a.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl LinearOperator for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        self.mul_vec(x)
    }
    fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        self.mul_vec_transpose(x)
    }
}

/// `P A = L U` with unit lower `L`. `perm[i]` is the original row placed at
/// position `i`.
#[derive(Debug, Clone)]
pub struct LuFactor {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
}

impl LuFactor {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Usage("LU needs a square matrix".into()));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pmax < SINGULAR_PIVOT {
                return Err(Error::Singular { step: k, pivot: pmax });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let l = lu[i * n + k] / pivot;
                lu[i * n + k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= l * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm, sign })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, b.len())?;
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        Ok(x)
    }

    /// Solve `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, b.len())?;
        let n = self.n;
        // A^T = U^T L^T P, so solve U^T z = b, L^T w = z, x = P^T w.
        let mut z = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[j * n + i] * z[j]).sum();
            z[i] = (z[i] - s) / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[j * n + i] * z[j]).sum();
            z[i] -= s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        Ok(x)
    }

    pub fn log_abs_det(&self) -> f64 {
        (0..self.n).map(|i| self.lu[i * self.n + i].abs().ln()).sum()
    }

    pub fn det_sign(&self) -> f64 {
        let neg = (0..self.n).filter(|&i| self.lu[i * self.n + i] < 0.0).count();
        if neg % 2 == 0 {
            self.sign
        } else {
            -self.sign
        }
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.n;
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e).expect("length checked");
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    LuFactor::new(a)?.solve(b)
}

pub fn dense_inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(LuFactor::new(a)?.inverse())
}

/// Pivots `d_k = det A_k / det A_{k-1}` of elimination without row
/// exchanges. Fails when a leading minor vanishes.
pub fn unpivoted_pivots(a: &DenseMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::Usage("pivots need a square matrix".into()));
    }
    let n = a.rows;
    let mut w = a.data.clone();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let p = w[k * n + k];
        if p.abs() <= f64::EPSILON * scale * n as f64 {
            return Err(Error::DegenerateMinor { order: k + 1 });
        }
        pivots.push(p);
        for i in k + 1..n {
            let l = w[i * n + k] / p;
            if l != 0.0 {
                for j in k + 1..n {
                    w[i * n + j] -= l * w[k * n + j];
                }
            }
        }
    }
    Ok(pivots)
}

/// Full one-sided Jacobi result `A = U diag(s) V^T`, singular values in
/// descending order.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

fn jacobi_core(a: &DenseMatrix, want_vectors: bool) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    // Works on columns; callers hand in a matrix with rows >= cols.
    let (m, n) = (a.rows, a.cols);
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = if want_vectors {
        (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect()
    } else {
        Vec::new()
    };
    let tol = (m as f64 * f64::EPSILON).max(1e-14);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut al = 0.0;
                    let mut be = 0.0;
                    let mut ga = 0.0;
                    for (x, y) in cp.iter().zip(cq) {
                        al += x * x;
                        be += y * y;
                        ga += x * y;
                    }
                    (al, be, ga)
                };
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
                if want_vectors {
                    let (lo, hi) = v.split_at_mut(q);
                    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let (xp, yq) = (*x, *y);
                        *x = c * xp - s * yq;
                        *y = s * xp + c * yq;
                    }
                }
            }
        }
        if !rotated {
            return Ok((cols, v));
        }
    }
    Err(Error::NonConvergence {
        what: "Jacobi SVD",
        iterations: JACOBI_MAX_SWEEPS,
    })
}

/// Singular values of `a`, descending.
pub fn jacobi_svd(a: &DenseMatrix) -> Result<Vec<f64>> {
    if a.rows.max(a.cols) > SVD_ORDER_LIMIT {
        return Err(Error::Resource(format!(
            "Jacobi SVD limited to order {SVD_ORDER_LIMIT}"
        )));
    }
    let work = if a.rows >= a.cols { a.clone() } else { a.transpose() };
    let (cols, _) = jacobi_core(&work, false)?;
    let mut s: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Full factors for a matrix with `rows >= cols`.
pub fn jacobi_svd_full(a: &DenseMatrix) -> Result<SvdFactors> {
    if a.rows < a.cols {
        return Err(Error::Usage("jacobi_svd_full needs rows >= cols".into()));
    }
    let (cols, v) = jacobi_core(a, true)?;
    let n = a.cols;
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = DenseMatrix::zeros(a.rows, n);
    let mut vm = DenseMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        s.push(norms[j]);
        for i in 0..a.rows {
            u[(i, k)] = if norms[j] > 0.0 { cols[j][i] / norms[j] } else { 0.0 };
        }
        for i in 0..n {
            vm[(i, k)] = v[j][i];
        }
    }
    Ok(SvdFactors { u, s, v: vm })
}

/// Exact norms of `A` and `A^{-1}` from dense factorizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseNorms {
    pub norm1: f64,
    pub norm_inf: f64,
    pub norm_fro: f64,
    pub norm2: f64,
    pub sigma_min: f64,
    pub inv_norm1: f64,
    pub inv_norm_fro: f64,
}

impl DenseNorms {
    pub fn kappa2(&self) -> f64 {
        self.norm2 / self.sigma_min
    }

    pub fn kappa1(&self) -> f64 {
        self.norm1 * self.inv_norm1
    }
}

pub fn dense_norms(a: &DenseMatrix) -> Result<DenseNorms> {
    let lu = LuFactor::new(a)?;
    let inv = lu.inverse();
    let s = jacobi_svd(a)?;
    Ok(DenseNorms {
        norm1: a.norm1(),
        norm_inf: a.norm_inf(),
        norm_fro: a.norm_fro(),
        norm2: s[0],
        sigma_min: *s.last().expect("non-empty"),
        inv_norm1: inv.norm1(),
        inv_norm_fro: inv.norm_fro(),
    })
}
