//! Small dense kernels and conjugate gradients used by the spectral engine.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sparse::LinearOperator;

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `y += a x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scale(a: f64, x: &mut [f64]) {
    for xi in x {
        *xi *= a;
    }
}

/// Outcome of a conjugate gradient solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Conjugate gradients for symmetric positive (semi-)definite operators.
///
/// `x` holds the initial guess on entry. Stops when `||b - A x|| <= tol ||b||`
/// by the recursive residual.
pub fn conjugate_gradient<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgReport> {
    let n = op.dim();
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgReport {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    while rr.sqrt() > tol * b_norm {
        if iterations == max_iter {
            return Err(Error::LinearSolveNoConvergence {
                iterations,
                residual: rr.sqrt() / b_norm,
            });
        }
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let step = rr / pap;
        axpy(step, &p, x);
        axpy(-step, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        iterations += 1;
    }
    Ok(CgReport {
        iterations,
        relative_residual: rr.sqrt() / b_norm,
    })
}

/// Eigen-decomposition of a small dense symmetric matrix (row-major) by cyclic Jacobi.
///
/// Returns eigenvalues in ascending order and the eigenvectors as columns of
/// a row-major `n x n` matrix.
pub fn symmetric_eigen(n: usize, matrix: &[f64]) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = a[i * n + j] * a[i * n + j];
                total += x;
                if i != j {
                    off += x;
                }
            }
        }
        if off <= 1e-30 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + new] = v[k * n + old];
        }
    }
    (values, vectors)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix `(diag, off)`
/// strictly below `x` (Sturm sequence count). `off[k]` couples rows `k` and `k+1`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for k in 0..diag.len() {
        let b2 = if k == 0 { 0.0 } else { off[k - 1] * off[k - 1] };
        d = diag[k] - x - if k == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (diag[k].abs() + x.abs() + 1e-300);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `index`-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix, by bisection.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], index: usize) -> f64 {
    let m = diag.len();
    assert!(index < m);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..m {
        let r = if k > 0 { off[k - 1].abs() } else { 0.0 } + if k + 1 < m { off[k].abs() } else { 0.0 };
        lo = lo.min(diag[k] - r);
        hi = hi.max(diag[k] + r);
    }
    let span = (hi - lo).abs().max(hi.abs()).max(1e-300);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * span {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T - shift I) y = rhs_scale * e_1` for a real symmetric tridiagonal `T`
/// and complex `shift` by Gaussian elimination without pivoting. Shifts off the
/// real axis keep every leading block nonsingular.
pub fn shifted_tridiagonal_solve(
    diag: &[f64],
    off: &[f64],
    shift: Complex64,
    rhs_scale: f64,
) -> Vec<Complex64> {
    let m = diag.len();
    let mut pivots = Vec::with_capacity(m);
    let mut upper = Vec::with_capacity(m);
    let mut y = Vec::with_capacity(m);
    for k in 0..m {
        let mut d = Complex64::new(diag[k], 0.0) - shift;
        let mut rhs = if k == 0 {
            Complex64::new(rhs_scale, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
        if k > 0 {
            let l = off[k - 1] / pivots[k - 1];
            d -= l * upper[k - 1];
            rhs -= l * y[k - 1];
        }
        pivots.push(d);
        upper.push(if k + 1 < m {
            Complex64::new(off[k], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        });
        y.push(rhs);
    }
    for k in (0..m).rev() {
        let mut v = y[k];
        if k + 1 < m {
            v -= upper[k] * y[k + 1];
        }
        y[k] = v / pivots[k];
    }
    y
}

/// Orthonormalizes the columns of `block` (each an `n`-vector) in place by
/// twice-applied modified Gram-Schmidt, first against `against` (assumed
/// orthonormal). Columns that collapse are replaced by nothing; the number of
/// surviving columns is returned and the block is truncated to it.
pub fn orthonormalize(block: &mut Vec<Vec<f64>>, against: &[Vec<f64>]) -> usize {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(block.len());
    for mut col in block.drain(..) {
        let initial = norm2(&col);
        if initial == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in against.iter().chain(kept.iter()) {
                let c = dot(q, &col);
                axpy(-c, q, &mut col);
            }
        }
        let nrm = norm2(&col);
        if nrm > 1e-10 * initial {
            scale(1.0 / nrm, &mut col);
            kept.push(col);
        }
    }
    *block = kept;
    block.len()
}

/// Least-squares solution of the overdetermined system `M c = rhs` (row-major
/// `rows x cols`) by Householder QR.
pub fn least_squares(rows: usize, cols: usize, matrix: &[f64], rhs: &[f64]) -> Vec<f64> {
    assert!(rows >= cols);
    let mut a = matrix.to_vec();
    let mut b = rhs.to_vec();
    for k in 0..cols {
        let mut alpha = 0.0;
        for i in k..rows {
            alpha += a[i * cols + k] * a[i * cols + k];
        }
        let alpha = -a[k * cols + k].signum() * alpha.sqrt();
        let mut v: Vec<f64> = (k..rows).map(|i| a[i * cols + k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..cols {
            let s: f64 = (k..rows).map(|i| v[i - k] * a[i * cols + j]).sum::<f64>() * 2.0 / vnorm2;
            for i in k..rows {
                a[i * cols + j] -= s * v[i - k];
            }
        }
        let s: f64 = (k..rows).map(|i| v[i - k] * b[i]).sum::<f64>() * 2.0 / vnorm2;
        for i in k..rows {
            b[i] -= s * v[i - k];
        }
    }
    let mut c = vec![0.0; cols];
    for k in (0..cols).rev() {
        let mut s = b[k];
        for j in (k + 1)..cols {
            s -= a[k * cols + j] * c[j];
        }
        c[k] = s / a[k * cols + k];
    }
    c
}
