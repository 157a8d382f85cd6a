//! Oracles shared by several test targets.

use std::f64::consts::PI;

/// Adaptive Simpson on `[a, b]`.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `Γ(n/2)` by the half-integer recurrence from `Γ(1/2) = √π`, `Γ(1) = 1`.
pub fn gamma_half(n: usize) -> f64 {
    let (mut g, mut h) = if n % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while h < n as f64 / 2.0 {
        g *= h;
        h += 1.0;
    }
    g
}

pub fn chi_cdf_quadrature(n: usize, y: f64) -> f64 {
    let c = 2.0 / (2f64.powf(n as f64 / 2.0) * gamma_half(n));
    let f = |x: f64| c * x.powi(n as i32 - 1) * (-x * x / 2.0).exp();
    // Split at the mode so each piece is smooth and unimodal at most.
    let mode = ((n as f64) - 1.0).sqrt().min(y);
    simpson(&f, 0.0, mode, 1e-14) + simpson(&f, mode, y, 1e-14)
}
