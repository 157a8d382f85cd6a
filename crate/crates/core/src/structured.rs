//! Toeplitz, Hankel and f-circulant matrices stored by their defining
//! vectors, with FFT-based products.
//!
//! Index conventions (0-based in code):
//!
//! * Toeplitz `m x n`: entry `(i, j)` is `t_{i-j}`, stored at
//!   `diagonals[i - j + n - 1]`, i.e. `t_h` for `h = 1-n ..= m-1` ascending.
//! * Hankel `m x n`: entry `(i, j)` is `antidiagonals[i + j]`.
//! * f-circulant: `Z_f(v) = Σ v_i Z_f^i`; column `j` holds `v_{i-j}` below
//!   the diagonal and `f v_{n+i-j}` above it.
//!
//! The reflection `J` is never formed; reversal is done by indexing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::DenseMatrix;
use crate::dft::{cyclic_convolve, linear_convolve, to_complex, DftPlan};
use crate::error::{check_finite, check_len, Error, Result};

/// Largest `rows * cols` any dense realization may allocate.
pub const DENSE_ENTRY_LIMIT: usize = 100_000_000;

/// Matrix-free access to `A x` and `A^T x`.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_transpose(&self, x: &[f64]) -> Vec<f64>;
}

fn dense_guard(rows: usize, cols: usize) -> Result<()> {
    match rows.checked_mul(cols) {
        Some(len) if len <= DENSE_ENTRY_LIMIT => Ok(()),
        _ => Err(Error::Resource(format!(
            "dense realization of {rows}x{cols} exceeds {DENSE_ENTRY_LIMIT} entries"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSpec {
    rows: usize,
    cols: usize,
    diagonals: Vec<f64>,
}

impl ToeplitzSpec {
    pub fn new(rows: usize, cols: usize, diagonals: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Usage("Toeplitz dimensions must be positive".into()));
        }
        check_len(rows + cols - 1, diagonals.len())?;
        check_finite(&diagonals)?;
        Ok(Self {
            rows,
            cols,
            diagonals,
        })
    }

    /// Square `n x n` Toeplitz matrix from `t_{1-n} ..= t_{n-1}`.
    pub fn square(diagonals: Vec<f64>) -> Result<Self> {
        if diagonals.len() % 2 == 0 {
            return Err(Error::Usage(
                "square Toeplitz needs an odd number of diagonals".into(),
            ));
        }
        let n = diagonals.len().div_ceil(2);
        Self::new(n, n, diagonals)
    }

    /// Build from first column `(t_0, .., t_{m-1})` and first row
    /// `(t_0, t_{-1}, .., t_{1-n})`; the shared corner is taken from the column.
    pub fn from_column_row(column: &[f64], row: &[f64]) -> Result<Self> {
        if column.is_empty() || row.is_empty() {
            return Err(Error::Usage("empty Toeplitz column or row".into()));
        }
        let mut diagonals: Vec<f64> = row[1..].iter().rev().copied().collect();
        diagonals.extend_from_slice(column);
        Self::new(column.len(), row.len(), diagonals)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut d = vec![0.0; 2 * n - 1];
        d[n - 1] = 1.0;
        Self::new(n, n, d)
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

    pub fn diagonals(&self) -> &[f64] {
        &self.diagonals
    }

    /// `t_h`, zero outside the stored band.
    pub fn t(&self, h: isize) -> f64 {
        let idx = h + self.cols as isize - 1;
        if idx < 0 || idx as usize >= self.diagonals.len() {
            0.0
        } else {
            self.diagonals[idx as usize]
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.diagonals[i + self.cols - 1 - j]
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.diagonals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            diagonals: self.diagonals.iter().rev().copied().collect(),
        }
    }

    /// The `rows x cols` Toeplitz block starting at `(row0, col0)` of the
    /// infinite extension `(t_{i-j})`; entries outside the band are zero.
    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Usage("empty Toeplitz block".into()));
        }
        let offset = row0 as isize - col0 as isize;
        let d = (1 - cols as isize..rows as isize)
            .map(|h| self.t(h + offset))
            .collect();
        Self::new(rows, cols, d)
    }

    /// Leading `k x k` principal block.
    pub fn leading(&self, k: usize) -> Result<Self> {
        if k > self.rows.min(self.cols) {
            return Err(Error::Usage(format!("leading block {k} out of range")));
        }
        self.block(0, 0, k, k)
    }

    /// First column `(t_0, .., t_{m-1})`.
    pub fn first_column(&self) -> Vec<f64> {
        self.diagonals[self.cols - 1..].to_vec()
    }

    /// Dense product `T x` via circulant embedding.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        check_finite(x)?;
        Ok(ToeplitzOperator::new(self).apply(x))
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        dense_guard(self.rows, self.cols)?;
        let mut a = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                a[(i, j)] = self.entry(i, j);
            }
        }
        Ok(a)
    }

    /// Re-extract diagonals from a dense matrix asserted to be Toeplitz.
    pub fn from_dense(a: &DenseMatrix) -> Result<Self> {
        let (m, n) = (a.rows(), a.cols());
        let mut d = Vec::with_capacity(m + n - 1);
        for h in 1 - n as isize..m as isize {
            let (i, j) = if h >= 0 { (h as usize, 0) } else { (0, (-h) as usize) };
            let v = a[(i, j)];
            let (mut ii, mut jj) = (i, j);
            while ii < m && jj < n {
                if a[(ii, jj)] != v {
                    return Err(Error::Usage(format!("matrix is not Toeplitz on diagonal {h}")));
                }
                ii += 1;
                jj += 1;
            }
            d.push(v);
        }
        Self::new(m, n, d)
    }
}

/// Prepared circulant embedding of a Toeplitz matrix for repeated products.
#[derive(Debug, Clone)]
pub struct ToeplitzOperator {
    rows: usize,
    cols: usize,
    plan: DftPlan,
    spectrum: Vec<Complex64>,
}

impl ToeplitzOperator {
    pub fn new(t: &ToeplitzSpec) -> Self {
        let (m, n) = (t.rows, t.cols);
        let len = (m + n).next_power_of_two();
        let plan = DftPlan::new(len).expect("positive length");
        let mut col = vec![Complex64::new(0.0, 0.0); len];
        for k in 0..m {
            col[k].re = t.t(k as isize);
        }
        for k in 1..n {
            col[len - k].re = t.t(-(k as isize));
        }
        plan.forward_in_place(&mut col);
        Self {
            rows: m,
            cols: n,
            plan,
            spectrum: col,
        }
    }

    fn product(&self, x: &[f64], out_len: usize, transpose: bool) -> Vec<f64> {
        let mut buf = to_complex(x, self.plan.len());
        self.plan.forward_in_place(&mut buf);
        if transpose {
            // The embedding circulant is real, so its transpose has the
            // conjugate spectrum.
            for (b, s) in buf.iter_mut().zip(&self.spectrum) {
                *b *= s.conj();
            }
        } else {
            for (b, s) in buf.iter_mut().zip(&self.spectrum) {
                *b *= s;
            }
        }
        self.plan.inverse_in_place(&mut buf);
        buf[..out_len].iter().map(|z| z.re).collect()
    }
}

impl LinearOperator for ToeplitzOperator {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        self.product(x, self.rows, false)
    }
    fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        self.product(x, self.cols, true)
    }
}

/// Which reflection relates a Hankel matrix to its Toeplitz partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReflectionSide {
    /// `H = T J_n` (columns reversed).
    Columns,
    /// `H = J_m T` (rows reversed).
    Rows,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HankelSpec {
    rows: usize,
    cols: usize,
    antidiagonals: Vec<f64>,
}

impl HankelSpec {
    pub fn new(rows: usize, cols: usize, antidiagonals: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Usage("Hankel dimensions must be positive".into()));
        }
        check_len(rows + cols - 1, antidiagonals.len())?;
        check_finite(&antidiagonals)?;
        Ok(Self {
            rows,
            cols,
            antidiagonals,
        })
    }

    /// The antidiagonal identity `J_n`.
    pub fn reflection(n: usize) -> Result<Self> {
        let mut d = vec![0.0; 2 * n - 1];
        d[n - 1] = 1.0;
        Self::new(n, n, d)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn antidiagonals(&self) -> &[f64] {
        &self.antidiagonals
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.antidiagonals[i + j]
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        dense_guard(self.rows, self.cols)?;
        let mut a = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                a[(i, j)] = self.entry(i, j);
            }
        }
        Ok(a)
    }

    /// `H = T J_n`: entry `(i, j)` of `T J` is `t_{i+j-(n-1)}`, so the
    /// Toeplitz diagonals coincide with the Hankel antidiagonals.
    pub fn to_toeplitz(&self) -> (ToeplitzSpec, ReflectionSide) {
        (self.to_toeplitz_with(ReflectionSide::Columns), ReflectionSide::Columns)
    }

    pub fn to_toeplitz_with(&self, side: ReflectionSide) -> ToeplitzSpec {
        let d = match side {
            ReflectionSide::Columns => self.antidiagonals.clone(),
            // J_m T has entry t_{m-1-i-j}.
            ReflectionSide::Rows => self.antidiagonals.iter().rev().copied().collect(),
        };
        ToeplitzSpec {
            rows: self.rows,
            cols: self.cols,
            diagonals: d,
        }
    }

    pub fn from_toeplitz(t: &ToeplitzSpec, side: ReflectionSide) -> Self {
        let d = match side {
            ReflectionSide::Columns => t.diagonals.clone(),
            ReflectionSide::Rows => t.diagonals.iter().rev().copied().collect(),
        };
        Self {
            rows: t.rows,
            cols: t.cols,
            antidiagonals: d,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        let reversed: Vec<f64> = x.iter().rev().copied().collect();
        self.to_toeplitz_with(ReflectionSide::Columns).matvec(&reversed)
    }
}

/// Hankel operator `T J` sharing a prepared Toeplitz embedding.
#[derive(Debug, Clone)]
pub struct HankelOperator {
    inner: ToeplitzOperator,
}

impl HankelOperator {
    pub fn new(h: &HankelSpec) -> Self {
        Self {
            inner: ToeplitzOperator::new(&h.to_toeplitz_with(ReflectionSide::Columns)),
        }
    }
}

impl LinearOperator for HankelOperator {
    fn nrows(&self) -> usize {
        self.inner.rows
    }
    fn ncols(&self) -> usize {
        self.inner.cols
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let r: Vec<f64> = x.iter().rev().copied().collect();
        self.inner.apply(&r)
    }
    fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.inner.apply_transpose(x);
        y.reverse();
        y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FCirculantSpec {
    column: Vec<f64>,
    f: f64,
}

impl FCirculantSpec {
    pub fn new(column: Vec<f64>, f: f64) -> Result<Self> {
        if column.is_empty() {
            return Err(Error::Usage("f-circulant order must be positive".into()));
        }
        check_finite(&column)?;
        if !f.is_finite() {
            return Err(Error::Usage("f must be finite".into()));
        }
        Ok(Self { column, f })
    }

    pub fn circulant(column: Vec<f64>) -> Result<Self> {
        Self::new(column, 1.0)
    }

    /// Lower triangular Toeplitz `Z(v)`.
    pub fn lower_triangular(column: Vec<f64>) -> Result<Self> {
        Self::new(column, 0.0)
    }

    pub fn order(&self) -> usize {
        self.column.len()
    }

    pub fn column(&self) -> &[f64] {
        &self.column
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.column[i - j]
        } else {
            self.f * self.column[self.order() + i - j]
        }
    }

    pub fn as_toeplitz(&self) -> ToeplitzSpec {
        let n = self.order();
        let mut d = Vec::with_capacity(2 * n - 1);
        for k in (1..n).rev() {
            d.push(self.f * self.column[n - k]);
        }
        d.extend_from_slice(&self.column);
        ToeplitzSpec {
            rows: n,
            cols: n,
            diagonals: d,
        }
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let n = self.order();
        dense_guard(n, n)?;
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = self.entry(i, j);
            }
        }
        Ok(a)
    }

    /// Real `r` with `r^n = f`, when one exists and `f != 0`.
    fn real_root(&self) -> Option<f64> {
        let n = self.order() as i32;
        if self.f > 0.0 {
            Some(self.f.powf(1.0 / n as f64))
        } else if self.f < 0.0 && n % 2 == 1 {
            Some(-(-self.f).powf(1.0 / n as f64))
        } else {
            None
        }
    }

    /// `Z_f(v) x`. `f = 1` is a cyclic convolution, `f = 0` a truncated
    /// linear one; otherwise `Z_f = U_r^{-1} D(U_r v) U_r` with
    /// `U_r = Ω D(r^i)`, `r^n = f`. When no real root exists (`f < 0`,
    /// `n` even) the product falls back to the Toeplitz embedding.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.order();
        check_len(n, x.len())?;
        check_finite(x)?;
        if self.f == 1.0 {
            return cyclic_convolve(&self.column, x);
        }
        if self.f == 0.0 {
            let mut y = linear_convolve(&self.column, x)?;
            y.truncate(n);
            return Ok(y);
        }
        let Some(r) = self.real_root() else {
            return self.as_toeplitz().matvec(x);
        };
        let plan = DftPlan::new(n)?;
        let powers: Vec<f64> = (0..n).map(|i| r.powi(i as i32)).collect();
        let scaled = |src: &[f64]| -> Vec<Complex64> {
            src.iter()
                .zip(&powers)
                .map(|(a, p)| Complex64::new(a * p, 0.0))
                .collect()
        };
        let mut u = scaled(&self.column);
        let mut w = scaled(x);
        plan.forward_in_place(&mut u);
        plan.forward_in_place(&mut w);
        for (a, b) in w.iter_mut().zip(&u) {
            *a *= b;
        }
        plan.inverse_in_place(&mut w);
        Ok(w.iter().zip(&powers).map(|(z, p)| z.re / p).collect())
    }
}

/// `T = Z(t) + Z(t_-)^T` with `t = (t_0, .., t_{n-1})` and
/// `t_- = (0, t_{-1}, .., t_{1-n})`. Both parts are returned as `f = 0`
/// f-circulants (lower triangular Toeplitz).
pub fn split_toeplitz(t: &ToeplitzSpec) -> Result<(FCirculantSpec, FCirculantSpec)> {
    if !t.is_square() {
        return Err(Error::Usage("split_toeplitz needs a square matrix".into()));
    }
    let n = t.rows;
    let lower: Vec<f64> = (0..n).map(|k| t.t(k as isize)).collect();
    let upper: Vec<f64> = (0..n)
        .map(|k| if k == 0 { 0.0 } else { t.t(-(k as isize)) })
        .collect();
    Ok((
        FCirculantSpec::lower_triangular(lower)?,
        FCirculantSpec::lower_triangular(upper)?,
    ))
}

/// Convert a Hankel matrix to the Toeplitz `T` with `H = T J`.
pub fn hankel_toeplitz_convert(h: &HankelSpec) -> (ToeplitzSpec, ReflectionSide) {
    h.to_toeplitz()
}

/// Any matrix the library can realize.
#[derive(Debug, Clone, PartialEq)]
pub enum StructuredMatrix {
    General(DenseMatrix),
    Toeplitz(ToeplitzSpec),
    Hankel(HankelSpec),
    FCirculant(FCirculantSpec),
}

impl StructuredMatrix {
    pub fn rows(&self) -> usize {
        match self {
            Self::General(a) => a.rows(),
            Self::Toeplitz(t) => t.rows,
            Self::Hankel(h) => h.rows,
            Self::FCirculant(c) => c.order(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Self::General(a) => a.cols(),
            Self::Toeplitz(t) => t.cols,
            Self::Hankel(h) => h.cols,
            Self::FCirculant(c) => c.order(),
        }
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        match self {
            Self::General(a) => {
                dense_guard(a.rows(), a.cols())?;
                Ok(a.clone())
            }
            Self::Toeplitz(t) => t.to_dense(),
            Self::Hankel(h) => h.to_dense(),
            Self::FCirculant(c) => c.to_dense(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::General(a) => a.matvec(x),
            Self::Toeplitz(t) => t.matvec(x),
            Self::Hankel(h) => h.matvec(x),
            Self::FCirculant(c) => c.matvec(x),
        }
    }

    /// Matrix-free operator for the estimators.
    pub fn operator(&self) -> Box<dyn LinearOperator + Send + Sync> {
        match self {
            Self::General(a) => Box::new(a.clone()),
            Self::Toeplitz(t) => Box::new(ToeplitzOperator::new(t)),
            Self::Hankel(h) => Box::new(HankelOperator::new(h)),
            Self::FCirculant(c) => Box::new(ToeplitzOperator::new(&c.as_toeplitz())),
        }
    }

    pub fn to_record(&self) -> SpecRecord {
        match self {
            Self::General(a) => SpecRecord {
                kind: "dense".into(),
                m: a.rows(),
                n: a.cols(),
                f: None,
                data: a.as_slice().to_vec(),
            },
            Self::Toeplitz(t) => SpecRecord {
                kind: "toeplitz".into(),
                m: t.rows,
                n: t.cols,
                f: None,
                data: t.diagonals.clone(),
            },
            Self::Hankel(h) => SpecRecord {
                kind: "hankel".into(),
                m: h.rows,
                n: h.cols,
                f: None,
                data: h.antidiagonals.clone(),
            },
            Self::FCirculant(c) => SpecRecord {
                kind: "fcirculant".into(),
                m: c.order(),
                n: c.order(),
                f: Some(c.f),
                data: c.column.clone(),
            },
        }
    }

    pub fn from_record(r: &SpecRecord) -> Result<Self> {
        match r.kind.as_str() {
            "dense" => Ok(Self::General(DenseMatrix::from_row_major(r.m, r.n, r.data.clone())?)),
            "toeplitz" => Ok(Self::Toeplitz(ToeplitzSpec::new(r.m, r.n, r.data.clone())?)),
            "hankel" => Ok(Self::Hankel(HankelSpec::new(r.m, r.n, r.data.clone())?)),
            "fcirculant" => {
                if r.m != r.n || r.data.len() != r.n {
                    return Err(Error::Format("f-circulant record must be square with n entries".into()));
                }
                let f = r
                    .f
                    .ok_or_else(|| Error::Format("f-circulant record without f".into()))?;
                Ok(Self::FCirculant(FCirculantSpec::new(r.data.clone(), f)?))
            }
            other => Err(Error::Format(format!("unknown spec kind {other:?}"))),
        }
    }
}

/// JSON record `{kind, m, n, f?, data}` used for reproducibility dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecRecord {
    pub kind: String,
    pub m: usize,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f: Option<f64>,
    pub data: Vec<f64>,
}

impl SpecRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain record serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }
}
