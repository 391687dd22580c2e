//! Lanczos with full reorthogonalization for a few extremal eigenpairs.

use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, scale, tridiagonal_eigenvalue};
use crate::sparse::LinearOperator;

pub(crate) const START_SEED: u64 = 0x5eed_1a2c_205e;

/// Deterministic pseudo-random start vector.
pub(crate) fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

pub(crate) fn project_out(x: &mut [f64], against: &[Vec<f64>]) {
    for q in against {
        let c = dot(q, x);
        axpy(-c, q, x);
    }
}

/// Solves `(T - shift I) y = rhs` for symmetric tridiagonal `T` by Gaussian
/// elimination with partial pivoting. Exactly singular pivots are nudged.
pub(crate) fn tridiagonal_solve(diag: &[f64], off: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    // Row k after elimination: u0[k] y_k + u1[k] y_{k+1} + u2[k] y_{k+2} = r[k]
    let mut u0 = vec![0.0; m];
    let mut u1 = vec![0.0; m];
    let mut u2 = vec![0.0; m];
    let mut r = rhs.to_vec();
    let tiny = f64::EPSILON * (diag.iter().chain(off).fold(0.0_f64, |a, v| a.max(v.abs())) + shift.abs()).max(1e-300);
    // current row being eliminated: (a, b, c) on columns (k, k+1, k+2)
    let mut a = diag[0] - shift;
    let mut b = if m > 1 { off[0] } else { 0.0 };
    let mut c = 0.0;
    for k in 0..m {
        if k + 1 < m {
            // next row: off[k] y_k + (diag[k+1]-shift) y_{k+1} + off[k+1] y_{k+2}
            let na = off[k];
            let nb = diag[k + 1] - shift;
            let nc = if k + 2 < m { off[k + 1] } else { 0.0 };
            if na.abs() > a.abs() {
                // swap current and next rows
                u0[k] = na;
                u1[k] = nb;
                u2[k] = nc;
                r.swap(k, k + 1);
                let l = a / na;
                r[k + 1] -= l * r[k];
                a = b - l * nb;
                b = c - l * nc;
                c = 0.0;
            } else {
                if a == 0.0 {
                    a = tiny;
                }
                u0[k] = a;
                u1[k] = b;
                u2[k] = c;
                let l = na / a;
                r[k + 1] -= l * r[k];
                a = nb - l * b;
                b = nc - l * c;
                c = 0.0;
            }
        } else {
            if a == 0.0 {
                a = tiny;
            }
            u0[k] = a;
            u1[k] = 0.0;
            u2[k] = 0.0;
        }
    }
    let mut y = vec![0.0; m];
    for k in (0..m).rev() {
        let mut s = r[k];
        if k + 1 < m {
            s -= u1[k] * y[k + 1];
        }
        if k + 2 < m {
            s -= u2[k] * y[k + 2];
        }
        y[k] = s / u0[k];
    }
    y
}

/// Normalized eigenvectors of `T` for the given eigenvalues (inverse iteration),
/// mutually orthogonalized in order.
fn tridiagonal_eigenvectors(diag: &[f64], off: &[f64], thetas: &[f64]) -> Vec<Vec<f64>> {
    let m = diag.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(thetas.len());
    for (i, &theta) in thetas.iter().enumerate() {
        let mut y = random_vector(m, START_SEED ^ (i as u64 + 1));
        for _ in 0..3 {
            project_out(&mut y, &out);
            y = tridiagonal_solve(diag, off, theta, &y);
            let n = norm2(&y);
            scale(1.0 / n, &mut y);
        }
        project_out(&mut y, &out);
        let n = norm2(&y);
        scale(1.0 / n, &mut y);
        out.push(y);
    }
    out
}

/// Extremal spectral information of a symmetric operator restricted to the
/// orthogonal complement of `against`.
pub(crate) struct Extremes {
    /// Smallest Ritz values, ascending.
    pub small: Vec<f64>,
    /// Ritz vectors for `small` (empty unless requested).
    pub small_vectors: Vec<Vec<f64>>,
    pub largest: f64,
}

pub(crate) struct ExtremesRequest<'a> {
    pub against: &'a [Vec<f64>],
    pub n_small: usize,
    pub want_vectors: bool,
    /// Accept a small pair when its residual is below `small_tol(theta, norm_estimate)`.
    pub small_tol: &'a dyn Fn(f64, f64) -> f64,
    /// Relative residual required of the largest Ritz pair.
    pub large_rel_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

pub(crate) fn lanczos_extremes<A: LinearOperator + ?Sized>(op: &A, req: &ExtremesRequest<'_>) -> Result<Extremes> {
    let n = op.dim();
    let space = n.saturating_sub(req.against.len());
    if space == 0 || req.n_small > space {
        return Err(Error::InvalidParameter {
            name: "ell",
            reason: alloc::format!("requested {} eigenpairs from a space of dimension {space}", req.n_small),
        });
    }
    let mut v = random_vector(n, req.seed);
    for _ in 0..2 {
        project_out(&mut v, req.against);
    }
    let nv = norm2(&v);
    scale(1.0 / nv, &mut v);

    let max_iter = req.max_iter.min(space);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut norm_est: f64 = 0.0;
    let mut worst = f64::INFINITY;
    loop {
        op.apply(&v, &mut w);
        let a = dot(&v, &w);
        axpy(-a, &v, &mut w);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(-b, prev, &mut w);
        }
        basis.push(v);
        alpha.push(a);
        for _ in 0..2 {
            project_out(&mut w, req.against);
            project_out(&mut w, &basis);
        }
        let b = norm2(&w);
        norm_est = norm_est.max(a.abs() + b + beta.last().copied().unwrap_or(0.0));
        let m = alpha.len();
        let exhausted = b <= 1e-12 * norm_est || m >= max_iter;
        if m >= req.n_small && (m.is_multiple_of(10) || exhausted) {
            let off = &beta[..];
            let small: Vec<f64> = (0..req.n_small).map(|i| tridiagonal_eigenvalue(&alpha, off, i)).collect();
            let largest = tridiagonal_eigenvalue(&alpha, off, m - 1);
            let mut thetas = small.clone();
            thetas.push(largest);
            let tvecs = tridiagonal_eigenvectors(&alpha, off, &thetas);
            let resid: Vec<f64> = tvecs.iter().map(|s| b * s[m - 1].abs()).collect();
            let norm = largest.abs().max(norm_est * 1e-3);
            let small_ok = small
                .iter()
                .zip(&resid)
                .all(|(&t, &r)| r <= (req.small_tol)(t, norm));
            let large_ok = resid[req.n_small] <= req.large_rel_tol * largest.abs();
            worst = small
                .iter()
                .zip(&resid)
                .map(|(&t, &r)| r / (req.small_tol)(t, norm).max(f64::MIN_POSITIVE))
                .fold(resid[req.n_small] / (req.large_rel_tol * largest.abs()).max(f64::MIN_POSITIVE), f64::max);
            if (small_ok && large_ok) || b <= 1e-12 * norm_est {
                let small_vectors = if req.want_vectors {
                    tvecs[..req.n_small]
                        .iter()
                        .map(|s| {
                            let mut x = vec![0.0; n];
                            for (vk, &sk) in basis.iter().zip(s) {
                                axpy(sk, vk, &mut x);
                            }
                            let nx = norm2(&x);
                            scale(1.0 / nx, &mut x);
                            x
                        })
                        .collect()
                } else {
                    Vec::new()
                };
                return Ok(Extremes {
                    small,
                    small_vectors,
                    largest,
                });
            }
        }
        if exhausted {
            return Err(Error::EigenNoConvergence {
                iterations: m,
                residual: worst,
            });
        }
        scale(1.0 / b, &mut w);
        beta.push(b);
        v = core::mem::replace(&mut w, vec![0.0; n]);
    }
}
