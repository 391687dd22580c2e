use nalgebra::{DMatrix, DVector, SymmetricEigen};
use vofl_core::discretize::{build_laplacian_1d, Mesh1D};
use vofl_core::error::Error;
use vofl_core::matfunc::{
    compute_deflation_basis, matfunc_apply, EngineSettings, MatFuncEngine, SpectralFunction, Warning,
};
use vofl_core::sparse::SparseOperator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `f(A) b` from a dense eigendecomposition.
fn dense_apply(a: &SparseOperator, f: &SpectralFunction, b: &[f64]) -> Vec<f64> {
    let n = a.dim();
    let m = DMatrix::from_row_slice(n, n, &a.to_dense());
    let eig = SymmetricEigen::new(m);
    let q = &eig.eigenvectors;
    let coef = q.transpose() * DVector::from_column_slice(b);
    // rounding noise on a null eigenvalue would be amplified by fractional powers
    let top = eig.eigenvalues.amax();
    let snap = |l: f64| if l.abs() <= 1e-12 * top { 0.0 } else { l };
    let scaled = DVector::from_iterator(n, (0..n).map(|i| f.eval_real(snap(eig.eigenvalues[i])) * coef[i]));
    (q * scaled).iter().copied().collect()
}

/// `f(A) b` from the closed-form eigenpairs of the Neumann second difference:
/// `lambda_k = 4 sin^2(k pi / 2n) / h^2`, `v_k(i) = cos(k pi (i + 1/2) / n)`.
fn neumann_apply(n: usize, f: &SpectralFunction, b: &[f64]) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    let pi = std::f64::consts::PI;
    let mut y = vec![0.0; n];
    for k in 0..n {
        let v: Vec<f64> = (0..n).map(|i| (k as f64 * pi * (i as f64 + 0.5) / n as f64).cos()).collect();
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / vv;
        let lambda = if k == 0 { 0.0 } else { 4.0 * (k as f64 * pi / (2.0 * n as f64)).sin().powi(2) / (h * h) };
        let g = f.eval_real(lambda) * c;
        for (yi, vi) in y.iter_mut().zip(&v) {
            *yi += g * vi;
        }
    }
    y
}

fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let n: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    d / n
}

fn neumann(n: usize) -> SparseOperator {
    build_laplacian_1d(&Mesh1D::new(n, 1.0 / (n - 1) as f64, 0.0).unwrap())
}

fn test_vector(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

fn smooth_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| (0.37 * i as f64).sin() + 0.2 * (i as f64 / n as f64)).collect()
}

#[test]
fn two_by_two_diagonal() {
    let a = SparseOperator::from_diagonal(&[1.0, 4.0]);
    let engine = MatFuncEngine::new(a, EngineSettings::default()).unwrap();
    let y = engine.apply(&SpectralFunction::Power { exponent: 0.75 }, &[1.0, 1.0]).unwrap();
    assert!((y[0] - 1.0).abs() < 1e-8, "{y:?}");
    assert!((y[1] - 4f64.powf(0.75)).abs() < 1e-8, "{y:?}");
}

#[test]
fn identity_matrix() {
    let a = SparseOperator::from_diagonal(&[1.0; 12]);
    let engine = MatFuncEngine::new(a, EngineSettings::default()).unwrap();
    let b = test_vector(12);
    let y = engine.apply(&SpectralFunction::Power { exponent: 0.6 }, &b).unwrap();
    assert!(rel_err(&y, &b) < 1e-9);
}

#[test]
fn neumann_laplacian_matches_dense() {
    let a = neumann(150);
    let b = test_vector(150);
    let engine = MatFuncEngine::new(a.clone(), EngineSettings::default()).unwrap();
    assert_eq!(engine.deflation().len(), 1);
    for &exp in &[0.55, 0.8, 0.95] {
        let f = SpectralFunction::Power { exponent: exp };
        let (y, stats) = engine.apply_with_stats(&f, &b).unwrap();
        let err = rel_err(&y, &dense_apply(&a, &f, &b));
        assert!(err < 1e-8, "exponent {exp}: {err:e}");
        assert!(stats.max_residual() < 1e-8);
    }
}

#[test]
fn preconditioned_and_plain_agree() {
    let a = neumann(180);
    let b = test_vector(180);
    let f = SpectralFunction::Power { exponent: 0.7 };
    let plain = MatFuncEngine::new(
        a.clone(),
        EngineSettings {
            poly_degree: 0,
            ..EngineSettings::default()
        },
    )
    .unwrap();
    assert!(plain.preconditioner().is_none());
    let pre = MatFuncEngine::new(
        a.clone(),
        EngineSettings {
            poly_degree: 6,
            poly_min_kappa: 1.0,
            ..EngineSettings::default()
        },
    )
    .unwrap();
    let (y0, s0) = plain.apply_with_stats(&f, &b).unwrap();
    let (y1, s1) = pre.apply_with_stats(&f, &b).unwrap();
    let reference = dense_apply(&a, &f, &b);
    assert!(rel_err(&y0, &reference) < 1e-8);
    assert!(rel_err(&y1, &reference) < 1e-8, "{:e} (preconditioned: {})", rel_err(&y1, &reference), s1.preconditioned);
    assert!(!s0.preconditioned);
}

#[test]
fn lean_mode_matches_stored_basis() {
    let a = neumann(120);
    let b = test_vector(120);
    let f = SpectralFunction::Power { exponent: 0.9 };
    let stored = MatFuncEngine::new(a.clone(), EngineSettings::default()).unwrap();
    let lean = MatFuncEngine::new(
        a,
        EngineSettings {
            keep_basis: false,
            ..EngineSettings::default()
        },
    )
    .unwrap();
    let y0 = stored.apply(&f, &b).unwrap();
    let y1 = lean.apply(&f, &b).unwrap();
    assert!(rel_err(&y1, &y0) < 1e-10);
}

#[test]
fn several_functions_share_one_basis() {
    let a = neumann(100);
    let b = test_vector(100);
    let fs = [
        SpectralFunction::Power { exponent: 0.75 },
        SpectralFunction::PowerDifference {
            coeff: 0.3,
            first: 0.75,
            second: 0.9,
        },
        SpectralFunction::ResolventOfPower {
            coeff: 0.05,
            exponent: 0.75,
        },
    ];
    let engine = MatFuncEngine::new(a.clone(), EngineSettings::default()).unwrap();
    let (ys, _) = engine.apply_many(&fs, &b).unwrap();
    for (f, y) in fs.iter().zip(&ys) {
        let err = rel_err(y, &dense_apply(&a, f, &b));
        assert!(err < 1e-8, "{f:?}: {err:e}");
    }
}

#[test]
fn integer_order_is_direct() {
    let a = neumann(60);
    let b = test_vector(60);
    let engine = MatFuncEngine::new(a.clone(), EngineSettings::default()).unwrap();
    let (y, stats) = engine
        .apply_with_stats(&SpectralFunction::fractional_power(2.0), &b)
        .unwrap();
    assert_eq!(y, a.mul_vec(&b).unwrap());
    assert_eq!(stats.iterations, 0);
    let f = SpectralFunction::ResolventOfPower { coeff: 0.1, exponent: 1.0 };
    let r = engine.apply(&f, &b).unwrap();
    assert!(rel_err(&r, &dense_apply(&a, &f, &b)) < 1e-8);
}

#[test]
fn full_deflation_is_exact() {
    let a = neumann(30);
    let b = test_vector(30);
    let defl = compute_deflation_basis(&a, 30).unwrap();
    assert!(defl.is_complete());
    let f = SpectralFunction::Power { exponent: 0.65 };
    let y = matfunc_apply(&f, &a, &b, &defl, 8, 1e-10).unwrap();
    let err = rel_err(&y, &neumann_apply(30, &f, &b));
    assert!(err < 1e-12, "{err:e} (dense {:e})", rel_err(&dense_apply(&a, &f, &b), &neumann_apply(30, &f, &b)));
}

#[test]
fn more_deflation_same_answer() {
    let a = neumann(250);
    let b = test_vector(250);
    let f = SpectralFunction::Power { exponent: 0.8 };
    let reference = dense_apply(&a, &f, &b);
    for ell in [1, 4] {
        let defl = compute_deflation_basis(&a, ell).unwrap();
        let y = matfunc_apply(&f, &a, &b, &defl, 40, 1e-10).unwrap();
        let err = rel_err(&y, &reference);
        assert!(err < 1e-8, "ell = {ell}: {err:e}");
    }
}

#[test]
fn smooth_data_with_more_poles() {
    let a = neumann(250);
    let b = smooth_vector(250);
    let f = SpectralFunction::Power { exponent: 0.8 };
    let defl = compute_deflation_basis(&a, 1).unwrap();
    let y = matfunc_apply(&f, &a, &b, &defl, 48, 1e-11).unwrap();
    let err = rel_err(&y, &dense_apply(&a, &f, &b));
    assert!(err < 1e-9, "{err:e}");
}

#[test]
fn error_decays_with_poles() {
    let a = neumann(200);
    let b = test_vector(200);
    let f = SpectralFunction::Power { exponent: 0.75 };
    let defl = compute_deflation_basis(&a, 1).unwrap();
    let reference = dense_apply(&a, &f, &b);
    let errs: Vec<f64> = [4, 8, 16]
        .iter()
        .map(|&p| rel_err(&matfunc_apply(&f, &a, &b, &defl, p, 1e-12).unwrap(), &reference))
        .collect();
    assert!(errs[1] < errs[0] && errs[2] < errs[1] / 10.0, "{errs:?}");
}

#[test]
fn refinement_gap_is_reported() {
    let a = neumann(80);
    let b = test_vector(80);
    let f = SpectralFunction::Power { exponent: 0.75 };
    let run = |p: usize| {
        let settings = EngineSettings {
            quad_points: p,
            check_refinement: true,
            ..EngineSettings::default()
        };
        let engine = MatFuncEngine::new(a.clone(), settings).unwrap();
        engine.apply_with_stats(&f, &b).unwrap().1
    };
    let fine = run(64);
    assert!(fine.refinement_gap.unwrap() < 1e-6);
    assert!(fine.warnings.is_empty());
    let coarse = run(12);
    assert!(matches!(coarse.warnings[..], [Warning::RefinementDisagreement { .. }]));
}

#[test]
fn singular_without_deflation() {
    let a = neumann(40);
    let err = MatFuncEngine::new(
        a,
        EngineSettings {
            deflation: Some(0),
            ..EngineSettings::default()
        },
    )
    .unwrap_err();
    assert!(matches!(err, Error::SingularDeflatedOperator { .. }), "{err}");
}

#[test]
fn dimension_is_checked() {
    let engine = MatFuncEngine::new(neumann(10), EngineSettings::default()).unwrap();
    assert!(matches!(
        engine.apply(&SpectralFunction::Power { exponent: 0.5 }, &[1.0; 9]),
        Err(Error::DimensionMismatch { expected: 10, got: 9 })
    ));
}
