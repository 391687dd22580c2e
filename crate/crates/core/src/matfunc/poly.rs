use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use super::bounds::SpectralBounds;
use crate::error::{invalid, Result};
use crate::linalg::least_squares;
use crate::sparse::LinearOperator;

/// Least-squares polynomial preconditioner `S` on `[a, b]`.
///
/// `S` minimizes `int (1 - lambda S(lambda))^2 w(t) dt` for the Jacobi weight
/// `w(t) = (1 - t)^{1/2} (1 + t)^{-1/2}` with `t = (lambda - p) / r` mapping
/// `[a, b]` to `[-1, 1]`. The weight is singular at the small end, where the
/// Krylov solver struggles most. The Lanczos process then runs on
/// `B = A S(A) = R(T)` with `T = (A - p I) / r`, and a shift `sigma` of `A`
/// becomes the shift `eta = R(t_sigma)` of `B`:
/// `(A - sigma I) s_sigma(A) = B - eta I`, so every shifted system keeps the
/// same Krylov space and the residuals carry over exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPreconditioner {
    degree: usize,
    center: f64,
    half_width: f64,
    /// `R(t) = lambda(t) S(t)` in powers of `t`, degree `degree + 1`.
    residual_coeffs: Vec<f64>,
    /// `S(t)` in powers of `t`.
    coeffs: Vec<f64>,
}

fn horner_real(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
}

/// Iteration count a Chebyshev-optimal Krylov method needs to reduce the
/// residual of `(M - shift) x = b` by `tol`, for `M` with spectrum in `[lo, hi]`.
pub(crate) fn chebyshev_iterations(shift: Complex64, lo: f64, hi: f64, tol: f64) -> f64 {
    if hi <= lo {
        return 1.0;
    }
    let zeta = (shift * 2.0 - (lo + hi)) / (hi - lo);
    let root = (zeta * zeta - 1.0).sqrt();
    let w = [zeta + root, zeta - root]
        .into_iter()
        .fold(0.0_f64, |m, w| m.max(w.norm()));
    if !(w > 1.0) {
        return f64::INFINITY;
    }
    (tol.ln() / -w.ln()).max(1.0)
}

impl PolyPreconditioner {
    /// Fits `S` of the given degree on the interval of `bounds`.
    pub fn fit(bounds: SpectralBounds, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(invalid("poly_degree", "degree must be at least 1"));
        }
        let center = 0.5 * (bounds.lambda_max + bounds.lambda_min);
        let half_width = 0.5 * (bounds.lambda_max - bounds.lambda_min);
        if !(half_width > 0.0) {
            return Err(invalid("bounds", "preconditioner needs a nondegenerate interval"));
        }
        let cols = degree + 1;
        let rows = (8 * cols).max(64);
        let mut matrix = vec![0.0; rows * cols];
        let mut rhs = vec![0.0; rows];
        for i in 0..rows {
            let t = ((2 * i + 1) as f64 * PI / (2 * rows) as f64).cos();
            let sw = (1.0 - t).sqrt();
            let lambda = center + half_width * t;
            let (mut tkm1, mut tk) = (1.0, t);
            for k in 0..cols {
                let tval = match k {
                    0 => 1.0,
                    1 => t,
                    _ => {
                        let next = 2.0 * t * tk - tkm1;
                        tkm1 = tk;
                        tk = next;
                        next
                    }
                };
                matrix[i * cols + k] = sw * lambda * tval;
            }
            rhs[i] = sw;
        }
        let cheb = least_squares(rows, cols, &matrix, &rhs);

        // Chebyshev series -> monomials in t
        let mut coeffs = vec![0.0; cols];
        let mut prev = vec![0.0; cols];
        let mut cur = vec![0.0; cols];
        prev[0] = 1.0;
        if cols > 1 {
            cur[1] = 1.0;
        }
        for (k, &ck) in cheb.iter().enumerate() {
            let basis = match k {
                0 => prev.clone(),
                1 => cur.clone(),
                _ => {
                    let mut next = vec![0.0; cols];
                    for j in 0..cols {
                        if j > 0 {
                            next[j] += 2.0 * cur[j - 1];
                        }
                        next[j] -= prev[j];
                    }
                    prev = core::mem::replace(&mut cur, next);
                    cur.clone()
                }
            };
            for j in 0..cols {
                coeffs[j] += ck * basis[j];
            }
        }
        let mut residual_coeffs = vec![0.0; cols + 1];
        for (j, &c) in coeffs.iter().enumerate() {
            residual_coeffs[j] += center * c;
            residual_coeffs[j + 1] += half_width * c;
        }
        Ok(Self {
            degree,
            center,
            half_width,
            residual_coeffs,
            coeffs,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn to_t(&self, lambda: f64) -> f64 {
        (lambda - self.center) / self.half_width
    }

    /// `S(lambda)`.
    pub fn value(&self, lambda: f64) -> f64 {
        horner_real(&self.coeffs, self.to_t(lambda))
    }

    /// `lambda S(lambda)`, the eigenvalue of the preconditioned operator.
    pub fn preconditioned_value(&self, lambda: f64) -> f64 {
        horner_real(&self.residual_coeffs, self.to_t(lambda))
    }

    /// Range of `lambda S(lambda)` over the fitted interval, sampled on a fine grid.
    pub fn preconditioned_range(&self) -> (f64, f64) {
        let samples = 4000;
        (0..=samples)
            .map(|i| self.preconditioned_value(self.center + self.half_width * (-1.0 + 2.0 * i as f64 / samples as f64)))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// `y = A S(A) x`; `work` must have the operator's dimension.
    pub fn apply<A: LinearOperator + ?Sized>(&self, a: &A, x: &[f64], y: &mut [f64], work: &mut [f64]) {
        let c = &self.residual_coeffs;
        let top = c.len() - 1;
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = c[top] * xi;
        }
        for k in (0..top).rev() {
            self.apply_t(a, y, work);
            for ((yi, wi), xi) in y.iter_mut().zip(work.iter()).zip(x) {
                *yi = wi + c[k] * xi;
            }
        }
    }

    /// `out = T y = (A y - p y) / r`.
    pub(crate) fn apply_t<A: LinearOperator + ?Sized>(&self, a: &A, y: &[f64], out: &mut [f64]) {
        a.apply(y, out);
        for (o, yi) in out.iter_mut().zip(y) {
            *o = (*o - self.center * yi) / self.half_width;
        }
    }

    /// For a shift `sigma` of `A`: `eta = sigma S(sigma)` and the coefficients
    /// (powers of `T`) of `s_sigma` with `(A - sigma I) s_sigma(A) = A S(A) - eta I`.
    pub fn shifted(&self, sigma: Complex64) -> (Complex64, Vec<Complex64>) {
        let ts = (sigma - self.center) / self.half_width;
        let c = &self.residual_coeffs;
        let d = c.len() - 1;
        let mut q = vec![Complex64::new(0.0, 0.0); d];
        let mut acc = Complex64::new(c[d], 0.0);
        for k in (0..d).rev() {
            q[k] = acc;
            acc = acc * ts + c[k];
        }
        let inv_r = 1.0 / self.half_width;
        (acc, q.into_iter().map(|v| v * inv_r).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseOperator;

    #[test]
    fn preconditioned_spectrum_is_compressed() {
        let bounds = SpectralBounds::new(1e-2, 100.0).unwrap();
        let p = PolyPreconditioner::fit(bounds, 8).unwrap();
        let (lo, hi) = p.preconditioned_range();
        assert!(lo > 0.0);
        assert!(hi / lo < bounds.kappa() / 10.0, "{lo} {hi}");
    }

    #[test]
    fn shifted_identity_holds_on_scalars() {
        let bounds = SpectralBounds::new(0.1, 10.0).unwrap();
        let p = PolyPreconditioner::fit(bounds, 6).unwrap();
        let sigma = Complex64::new(2.0, 0.7);
        let (eta, s) = p.shifted(sigma);
        let lambda = 3.3;
        let t = (lambda - 5.05) / 4.95;
        let s_val = s.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c);
        let lhs = s_val * (lambda - sigma);
        let rhs = Complex64::new(p.preconditioned_value(lambda), 0.0) - eta;
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn operator_application_matches_scalar() {
        let d = [0.2, 1.0, 3.0, 7.5];
        let a = SparseOperator::from_diagonal(&d);
        let p = PolyPreconditioner::fit(SpectralBounds::new(0.1, 8.0).unwrap(), 5).unwrap();
        let x = [1.0; 4];
        let mut y = [0.0; 4];
        let mut w = [0.0; 4];
        p.apply(&a, &x, &mut y, &mut w);
        for i in 0..4 {
            assert!((y[i] - p.preconditioned_value(d[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_estimate_grows_near_spectrum() {
        let far = chebyshev_iterations(Complex64::new(-10.0, 0.0), 1.0, 2.0, 1e-10);
        let near = chebyshev_iterations(Complex64::new(0.999, 0.0), 1.0, 2.0, 1e-10);
        assert!(near > far);
        assert!(chebyshev_iterations(Complex64::new(1.5, 0.0), 1.0, 2.0, 1e-10).is_infinite());
    }
}
