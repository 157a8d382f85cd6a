//! Discrete Fourier transform of arbitrary length.
//!
//! The forward transform is the unnormalized `y = Ω x` with
//! `Ω = (ω^{jk})`, `ω = exp(2πi/n)`; the inverse is `(1/n) Ω^H y`.
//! Power-of-two lengths use an iterative radix-2 kernel. Every other
//! length goes through Bluestein's chirp reduction to a power-of-two
//! cyclic convolution, so no length is silently refused.
//!
//! Plans are immutable after construction. Transforms allocate their own
//! scratch, so one plan can be shared by any number of threads.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_finite, check_len, Error, Result};

#[derive(Debug, Clone)]
pub struct DftPlan {
    len: usize,
    strategy: Strategy,
}

#[derive(Debug, Clone)]
enum Strategy {
    Trivial,
    Radix2 {
        /// `exp(2πi k / n)` for `k < n/2`.
        twiddles: Vec<Complex64>,
        log2: u32,
    },
    Bluestein {
        /// `exp(πi k² / n)`, `k < n`.
        chirp: Vec<Complex64>,
        /// Forward transform of the conjugate chirp kernel, pre-divided by
        /// the inner length so the inner inverse needs no extra scaling.
        kernel: Vec<Complex64>,
        inner: Box<DftPlan>,
    },
}

/// Which algorithm a plan uses; exposed for tests and benches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DftStrategy {
    Trivial,
    Radix2,
    Bluestein,
}

impl DftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Usage("DFT length must be at least 1".into()));
        }
        if len == 1 {
            return Ok(Self {
                len,
                strategy: Strategy::Trivial,
            });
        }
        if len.is_power_of_two() {
            let half = len / 2;
            let twiddles = (0..half)
                .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / len as f64))
                .collect();
            return Ok(Self {
                len,
                strategy: Strategy::Radix2 {
                    twiddles,
                    log2: len.trailing_zeros(),
                },
            });
        }

        let m = (2 * len - 1).next_power_of_two();
        let inner = DftPlan::new(m)?;
        let two_n = 2 * len as u128;
        let chirp: Vec<Complex64> = (0..len)
            .map(|k| {
                // k² mod 2n keeps the angle argument small and exact.
                let r = ((k as u128 * k as u128) % two_n) as f64;
                Complex64::from_polar(1.0, PI * r / len as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..len {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.forward_in_place(&mut kernel);
        let scale = 1.0 / m as f64;
        kernel.iter_mut().for_each(|z| *z *= scale);
        Ok(Self {
            len,
            strategy: Strategy::Bluestein {
                chirp,
                kernel,
                inner: Box::new(inner),
            },
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn strategy(&self) -> DftStrategy {
        match self.strategy {
            Strategy::Trivial => DftStrategy::Trivial,
            Strategy::Radix2 { .. } => DftStrategy::Radix2,
            Strategy::Bluestein { .. } => DftStrategy::Bluestein,
        }
    }

    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_input(x)?;
        let mut buf = x.to_vec();
        self.forward_in_place(&mut buf);
        Ok(buf)
    }

    pub fn inverse(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_input(y)?;
        let mut buf = y.to_vec();
        self.inverse_in_place(&mut buf);
        Ok(buf)
    }

    fn check_input(&self, x: &[Complex64]) -> Result<()> {
        check_len(self.len, x.len())?;
        match x.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    /// Unchecked forward transform; `buf.len()` must equal the plan length.
    pub(crate) fn forward_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.len);
        match &self.strategy {
            Strategy::Trivial => {}
            Strategy::Radix2 { twiddles, log2 } => radix2(buf, twiddles, *log2),
            Strategy::Bluestein {
                chirp,
                kernel,
                inner,
            } => {
                let m = inner.len;
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for (w, (x, c)) in work.iter_mut().zip(buf.iter().zip(chirp)) {
                    *w = x * c;
                }
                inner.forward_in_place(&mut work);
                for (w, k) in work.iter_mut().zip(kernel) {
                    *w = (*w * k).conj();
                }
                // conj(Ω conj(z)) is the unscaled inverse of the inner plan.
                inner.forward_in_place(&mut work);
                for (out, (w, c)) in buf.iter_mut().zip(work.iter().zip(chirp)) {
                    *out = w.conj() * c;
                }
            }
        }
    }

    /// Unchecked inverse transform including the `1/n` factor.
    pub(crate) fn inverse_in_place(&self, buf: &mut [Complex64]) {
        buf.iter_mut().for_each(|z| *z = z.conj());
        self.forward_in_place(buf);
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|z| *z = z.conj() * scale);
    }
}

fn radix2(buf: &mut [Complex64], twiddles: &[Complex64], log2: u32) {
    let n = buf.len();
    let shift = usize::BITS - log2;
    for i in 0..n {
        let j = i.reverse_bits() >> shift;
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut half = 1;
    while half < n {
        let stride = n / (2 * half);
        for start in (0..n).step_by(2 * half) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        half *= 2;
    }
}

pub fn dft_forward(plan: &DftPlan, x: &[Complex64]) -> Result<Vec<Complex64>> {
    plan.forward(x)
}

pub fn dft_inverse(plan: &DftPlan, y: &[Complex64]) -> Result<Vec<Complex64>> {
    plan.inverse(y)
}

pub(crate) fn to_complex(x: &[f64], len: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (o, v) in out.iter_mut().zip(x) {
        o.re = *v;
    }
    out
}

/// `c_k = Σ_j a_{(k-j) mod n} b_j`, evaluated through the DFT.
pub fn cyclic_convolve(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    check_len(a.len(), b.len())?;
    if a.is_empty() {
        return Err(Error::Usage("convolution of empty vectors".into()));
    }
    check_finite(a)?;
    check_finite(b)?;
    let plan = DftPlan::new(a.len())?;
    let mut fa = to_complex(a, a.len());
    let mut fb = to_complex(b, b.len());
    plan.forward_in_place(&mut fa);
    plan.forward_in_place(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    plan.inverse_in_place(&mut fa);
    Ok(fa.into_iter().map(|z| z.re).collect())
}

/// Full linear convolution of length `a.len() + b.len() - 1`.
pub fn linear_convolve(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Usage("convolution of empty vectors".into()));
    }
    check_finite(a)?;
    check_finite(b)?;
    let out_len = a.len() + b.len() - 1;
    let m = out_len.next_power_of_two();
    let plan = DftPlan::new(m)?;
    let mut fa = to_complex(a, m);
    let mut fb = to_complex(b, m);
    plan.forward_in_place(&mut fa);
    plan.forward_in_place(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    plan.inverse_in_place(&mut fa);
    Ok(fa[..out_len].iter().map(|z| z.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn unit_impulse_transforms_to_ones() {
        let plan = DftPlan::new(4).unwrap();
        let y = plan.forward(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert!(close(&y, &[c(1.0); 4], 1e-15));
    }

    #[test]
    fn ones_transform_to_scaled_impulse() {
        let plan = DftPlan::new(4).unwrap();
        let y = plan.forward(&[c(1.0); 4]).unwrap();
        assert!(close(&y, &[c(4.0), c(0.0), c(0.0), c(0.0)], 1e-14));
        let x = plan.inverse(&y).unwrap();
        assert!(close(&x, &[c(1.0); 4], 1e-15));
    }

    #[test]
    fn inverse_of_zero_is_zero() {
        for n in [1, 3, 8, 12] {
            let plan = DftPlan::new(n).unwrap();
            let z = vec![c(0.0); n];
            assert_eq!(plan.inverse(&z).unwrap(), z);
        }
    }

    #[test]
    fn forward_uses_positive_exponent() {
        // Second row of Ω for n = 4 is (1, i, -1, -i).
        let plan = DftPlan::new(4).unwrap();
        let y = plan.forward(&[c(0.0), c(1.0), c(0.0), c(0.0)]).unwrap();
        let expect = [c(1.0), Complex64::i(), c(-1.0), -Complex64::i()];
        assert!(close(&y, &expect, 1e-15));
        let plan = DftPlan::new(3).unwrap();
        let y = plan.forward(&[c(0.0), c(1.0), c(0.0)]).unwrap();
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!(close(&y, &[c(1.0), w, w * w], 1e-14));
    }

    #[test]
    fn strategies() {
        assert_eq!(DftPlan::new(1).unwrap().strategy(), DftStrategy::Trivial);
        assert_eq!(DftPlan::new(64).unwrap().strategy(), DftStrategy::Radix2);
        assert_eq!(DftPlan::new(17).unwrap().strategy(), DftStrategy::Bluestein);
        assert!(DftPlan::new(0).is_err());
    }

    #[test]
    fn length_mismatch_is_usage_error() {
        let plan = DftPlan::new(4).unwrap();
        assert!(matches!(
            plan.forward(&[c(1.0); 3]),
            Err(Error::DimensionMismatch { expected: 4, got: 3 })
        ));
        assert!(plan.inverse(&[c(1.0); 5]).is_err());
        assert!(cyclic_convolve(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn non_finite_input_rejected() {
        let plan = DftPlan::new(2).unwrap();
        assert!(matches!(
            plan.forward(&[c(1.0), c(f64::NAN)]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn convolution_identity_and_shift() {
        let b = [0.3, -1.7, 2.5];
        let y = cyclic_convolve(&[1.0, 0.0, 0.0], &b).unwrap();
        assert!(y.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-15));
        let y = cyclic_convolve(&[0.0, 1.0, 0.0], &b).unwrap();
        let shifted = [b[2], b[0], b[1]];
        assert!(y.iter().zip(&shifted).all(|(p, q)| (p - q).abs() < 1e-15));
    }

    #[test]
    fn linear_convolution_small() {
        let y = linear_convolve(&[1.0, 2.0], &[3.0, 4.0, 5.0]).unwrap();
        let expect = [3.0, 10.0, 13.0, 10.0];
        assert!(y.iter().zip(&expect).all(|(p, q)| (p - q).abs() < 1e-13));
    }
}
