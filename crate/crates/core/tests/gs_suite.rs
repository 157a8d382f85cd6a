//! Gohberg-Semencul representations against dense inverses.

use condlab::dense::{dense_inverse, jacobi_svd, DenseMatrix};
use condlab::ensembles::TrialStream;
use condlab::gs::{build_gs_a, build_gs_bc, GsInverse, GsPart};
use condlab::structured::{LinearOperator, ToeplitzSpec};
use condlab::Error;

fn random_toeplitz(s: &mut TrialStream, n: usize) -> ToeplitzSpec {
    ToeplitzSpec::square((0..2 * n - 1).map(|_| s.standard_normal()).collect()).unwrap()
}

fn rel_fro(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).unwrap().norm_fro() / b.norm_fro()
}

/// Draw until `build` succeeds on a fresh matrix; degenerate draws are rare.
fn draw<T>(s: &mut TrialStream, n: usize, build: impl Fn(&ToeplitzSpec) -> Result<T, Error>) -> (ToeplitzSpec, T) {
    loop {
        let t = random_toeplitz(s, n);
        match build(&t) {
            Ok(g) => return (t, g),
            Err(e) if e.is_resamplable() => continue,
            Err(e) => panic!("n = {n}: {e}"),
        }
    }
}

#[test]
fn part_a_reconstructs_inverse() {
    let mut s = TrialStream::new(11, 0, 0);
    for trial in 0..100 {
        let n = 2 + (s.uniform01() * 255.0) as usize;
        let (t, g) = draw(&mut s, n, build_gs_a);
        let want = dense_inverse(&t.to_dense().unwrap()).unwrap();
        let got = g.to_dense().unwrap();
        let err = rel_fro(&got, &want);
        assert!(err < 1e-8, "trial {trial}, n = {n}: {err:e}");
    }
}

#[test]
fn part_b_reconstructs_leading_inverse() {
    let mut s = TrialStream::new(12, 0, 0);
    for trial in 0..100 {
        let n = 2 + (s.uniform01() * 255.0) as usize;
        let (ext, g) = draw(&mut s, n + 1, |t| build_gs_bc(t, GsPart::B));
        let lead = ext.leading(n).unwrap().to_dense().unwrap();
        let err = rel_fro(&g.to_dense().unwrap(), &dense_inverse(&lead).unwrap());
        assert!(err < 1e-8, "trial {trial}, n = {n}: {err:e}");
    }
}

#[test]
fn part_c_reconstructs_displaced_inverse() {
    let mut s = TrialStream::new(13, 0, 0);
    for n in [2, 3, 5, 16, 40, 97] {
        let (ext, g) = draw(&mut s, n + 1, |t| build_gs_bc(t, GsPart::C));
        let block = ext.block(1, 0, n, n).unwrap().to_dense().unwrap();
        let err = rel_fro(&g.to_dense().unwrap(), &dense_inverse(&block).unwrap());
        assert!(err < 1e-8, "n = {n}: {err:e}");
        let GsInverse::BC(bc) = &g else { panic!() };
        assert!(bc.aux().is_some() && bc.which() == GsPart::C);
    }
}

#[test]
fn factor_inequality_every_trial() {
    // ||p1 T^{-1}|| <= 2 ||p||_1 ||q||_1 <= 2n ||p|| ||q||.
    let mut s = TrialStream::new(14, 0, 0);
    for trial in 0..200 {
        let n = 2 + (s.uniform01() * 127.0) as usize;
        let (t, g) = draw(&mut s, n, build_gs_a);
        let GsInverse::A(a) = &g else { panic!() };
        let inv = dense_inverse(&t.to_dense().unwrap()).unwrap();
        let lhs = a.p1().abs() * jacobi_svd(&inv).unwrap()[0];
        let l1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
        let l2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mid = 2.0 * l1(a.p()) * l1(a.q());
        let rhs = 2.0 * n as f64 * l2(a.p()) * l2(a.q());
        assert!(lhs <= mid * (1.0 + 1e-10), "trial {trial}: {lhs} > {mid}");
        assert!(mid <= rhs * (1.0 + 1e-12), "trial {trial}: {mid} > {rhs}");
    }
}

#[test]
fn fast_path_matches_dense_path() {
    // Above the dense limit the columns come from Levinson plus refinement.
    let mut s = TrialStream::new(15, 0, 0);
    for n in [513, 700, 1024] {
        let (t, g) = draw(&mut s, n, build_gs_a);
        let x: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
        let b = t.matvec(&x).unwrap();
        let y = LinearOperator::apply(&g, &b);
        let err = y.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            / x.iter().map(|v| v * v).sum::<f64>().sqrt();
        // Forward error is bounded by κ times the backward error the probe enforces.
        assert!(err < 1e-6, "n = {n}: {err:e}");
    }
}

#[test]
fn exact_norms_match_dense() {
    let mut s = TrialStream::new(16, 0, 0);
    for n in [1, 2, 9, 64] {
        let (_, g) = draw(&mut s, n, build_gs_a);
        let d = g.to_dense().unwrap();
        let (one, fro) = g.norms_exact();
        assert!((one - d.norm1()).abs() <= 1e-12 * d.norm1(), "n = {n}");
        assert!((fro - d.norm_fro()).abs() <= 1e-12 * d.norm_fro(), "n = {n}");
    }
}
