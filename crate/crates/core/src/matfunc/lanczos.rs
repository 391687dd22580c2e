use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::deflation::DeflationBasis;
use super::for_each_shift;
use super::poly::PolyPreconditioner;
use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{axpy, dot, norm2, scale, shifted_tridiagonal_solve};
use crate::sparse::{LinearOperator, SparseOperator};

/// `A` restricted to the complement of a deflation space: `y = (I - Q Q^T) A x`.
pub(crate) struct Projected<'a> {
    pub a: &'a SparseOperator,
    pub defl: &'a DeflationBasis,
}

impl LinearOperator for Projected<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.a.matvec(x, y);
        self.defl.project_out(y);
    }
}

/// The operator the Krylov space is built from: `A`, or `A S(A)`, followed by
/// the deflation projection when `defl` is set.
pub(crate) struct KrylovOperator<'a, A: LinearOperator + ?Sized> {
    pub a: &'a A,
    pub defl: Option<&'a DeflationBasis>,
    pub precond: Option<&'a PolyPreconditioner>,
}

impl<A: LinearOperator + ?Sized> KrylovOperator<'_, A> {
    /// Applications of `A` per application of this operator.
    pub fn cost(&self) -> usize {
        self.precond.map_or(1, |p| p.degree() + 1)
    }

    /// The polynomial runs on the unprojected matrix: the deflated vectors are
    /// eigenvectors up to a small residual `r`, so projecting once at the end
    /// differs from projecting after every product by `O(|r|^2)`.
    fn apply(&self, x: &[f64], y: &mut [f64], work: &mut [f64]) {
        match self.precond {
            Some(p) => p.apply(self.a, x, y, work),
            None => self.a.apply(x, y),
        }
        if let Some(d) = self.defl {
            d.project_out(y);
        }
    }
}

/// Lanczos tridiagonalization of `B` started from `b`, together with the
/// per-shift residual recurrences for `(B - eta_j) y_j = b`.
pub(crate) struct KrylovRun {
    pub alpha: Vec<f64>,
    /// `beta[k]` couples basis vectors `k` and `k + 1`.
    pub beta: Vec<f64>,
    pub b_norm: f64,
    start: Vec<f64>,
    basis: Option<Vec<Vec<f64>>>,
    pub iterations: usize,
    /// Applications of `A` (a preconditioned step counts `degree + 1`).
    pub matvecs: usize,
    /// Final relative residual per shift.
    pub residuals: Vec<f64>,
}

pub(crate) struct RunControl<'a> {
    pub tol: f64,
    pub max_iter: usize,
    pub keep_basis: bool,
    /// Extra stopping condition on the relative residuals, checked once every
    /// shift is below `tol`.
    pub accept: &'a dyn Fn(&[f64]) -> bool,
}

impl KrylovRun {
    pub fn run<A: LinearOperator + ?Sized>(
        op: &KrylovOperator<'_, A>,
        b: &[f64],
        shifts: &[Complex64],
        ctl: &RunControl<'_>,
    ) -> Result<Self> {
        let n = op.a.dim();
        let b_norm = norm2(b);
        let mut run = Self {
            alpha: Vec::new(),
            beta: Vec::new(),
            b_norm,
            start: b.to_vec(),
            basis: ctl.keep_basis.then(Vec::new),
            iterations: 0,
            matvecs: 0,
            residuals: vec![0.0; shifts.len()],
        };
        if b_norm == 0.0 {
            return Ok(run);
        }
        scale(1.0 / b_norm, &mut run.start);
        let mut v_prev = vec![0.0; n];
        let mut v = run.start.clone();
        let mut w = vec![0.0; n];
        let mut work = vec![0.0; n];
        // pivots d_k and scaled last components rho_k per shift
        let mut d: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); shifts.len()];
        let mut rho: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); shifts.len()];
        let mut norm_est: f64 = 0.0;
        loop {
            op.apply(&v, &mut w, &mut work);
            run.matvecs += op.cost();
            let a = dot(&v, &w);
            axpy(-a, &v, &mut w);
            if let Some(&bp) = run.beta.last() {
                axpy(-bp, &v_prev, &mut w);
            }
            let b_next = norm2(&w);
            let k = run.alpha.len();
            for j in 0..shifts.len() {
                if k == 0 {
                    d[j] = Complex64::new(a, 0.0) - shifts[j];
                    rho[j] = d[j].inv();
                } else {
                    let bp = run.beta[k - 1];
                    d[j] = Complex64::new(a, 0.0) - shifts[j] - d[j].inv() * (bp * bp);
                    rho[j] = -(rho[j] * bp) / d[j];
                }
            }
            run.alpha.push(a);
            if let Some(basis) = run.basis.as_mut() {
                basis.push(v.clone());
            }
            run.iterations += 1;
            norm_est = norm_est.max(a.abs() + b_next + run.beta.last().copied().unwrap_or(0.0));
            let breakdown = b_next <= 1e-14 * norm_est;
            for (r, rj) in run.residuals.iter_mut().zip(&rho) {
                *r = if breakdown { 0.0 } else { b_next * rj.norm() };
            }
            let worst = run.residuals.iter().fold(0.0_f64, |m, &r| m.max(r));
            if breakdown || (worst <= ctl.tol && (ctl.accept)(&run.residuals)) {
                return Ok(run);
            }
            if !worst.is_finite() {
                return Err(Error::LanczosNoConvergence {
                    iterations: run.iterations,
                    residual: worst,
                });
            }
            if run.iterations >= ctl.max_iter || run.iterations >= n {
                return Err(Error::LanczosNoConvergence {
                    iterations: run.iterations,
                    residual: worst,
                });
            }
            scale(1.0 / b_next, &mut w);
            run.beta.push(b_next);
            core::mem::swap(&mut v_prev, &mut v);
            core::mem::swap(&mut v, &mut w);
        }
    }

    /// `c` with `y = V c` solving the projected system `(T - eta) c = ||b|| e_1`.
    pub fn coefficients(&self, eta: Complex64) -> Vec<Complex64> {
        if self.alpha.is_empty() {
            return Vec::new();
        }
        shifted_tridiagonal_solve(&self.alpha, &self.beta, eta, self.b_norm)
    }

    /// `V g` for every `g` in `coeffs`; the basis is regenerated when it was not kept.
    pub fn expand<A: LinearOperator + ?Sized>(&self, op: &KrylovOperator<'_, A>, coeffs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = self.start.len();
        let mut out = vec![vec![0.0; n]; coeffs.len()];
        let m = self.alpha.len();
        if m == 0 {
            return out;
        }
        if let Some(basis) = &self.basis {
            for (o, g) in out.iter_mut().zip(coeffs) {
                for (vk, &gk) in basis.iter().zip(g) {
                    axpy(gk, vk, o);
                }
            }
            return out;
        }
        let mut v_prev = vec![0.0; n];
        let mut v = self.start.clone();
        let mut w = vec![0.0; n];
        let mut work = vec![0.0; n];
        for k in 0..m {
            for (o, g) in out.iter_mut().zip(coeffs) {
                axpy(g[k], &v, o);
            }
            if k + 1 == m {
                break;
            }
            op.apply(&v, &mut w, &mut work);
            axpy(-self.alpha[k], &v, &mut w);
            if k > 0 {
                axpy(-self.beta[k - 1], &v_prev, &mut w);
            }
            scale(1.0 / self.beta[k], &mut w);
            core::mem::swap(&mut v_prev, &mut v);
            core::mem::swap(&mut v, &mut w);
        }
        out
    }
}

/// Counters from one shifted solve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveStats {
    pub iterations: usize,
    /// Sparse matrix-vector products with `A`.
    pub matvecs: usize,
    /// Relative residual `||(z_j I - A) x_j - b|| / ||b||` per shift, from the recurrences.
    pub residuals: Vec<f64>,
    pub preconditioned: bool,
}

/// Solves `(z_j I - A) x_j = b` for every shift from a single Krylov basis.
///
/// With a preconditioner the basis is built for `A S(A)` and each solution is
/// recovered as `x_j = -s_j(A) y_j`.
pub fn shifted_lanczos_solve(
    a: &SparseOperator,
    b: &[f64],
    shifts: &[Complex64],
    tol: f64,
    max_iter: usize,
    precond: Option<&PolyPreconditioner>,
) -> Result<(Vec<Vec<Complex64>>, SolveStats)> {
    check_dim(a.dim(), b.len())?;
    if !(tol > 0.0) {
        return Err(invalid("tol", "tolerance must be positive"));
    }
    let op = KrylovOperator { a, defl: None, precond };
    let shifted: Vec<(Complex64, Vec<Complex64>)> = shifts
        .iter()
        .map(|&z| match precond {
            Some(p) => p.shifted(z),
            None => (z, vec![Complex64::new(1.0, 0.0)]),
        })
        .collect();
    let etas: Vec<Complex64> = shifted.iter().map(|s| s.0).collect();
    let accept = |_: &[f64]| true;
    let run = KrylovRun::run(
        &op,
        b,
        &etas,
        &RunControl {
            tol,
            max_iter,
            keep_basis: true,
            accept: &accept,
        },
    )?;
    let coeffs = for_each_shift(etas.len(), |j| run.coefficients(etas[j]));
    let mut real_parts = Vec::with_capacity(2 * coeffs.len());
    for c in &coeffs {
        real_parts.push(c.iter().map(|v| v.re).collect::<Vec<_>>());
        real_parts.push(c.iter().map(|v| v.im).collect::<Vec<_>>());
    }
    let vecs = run.expand(&op, &real_parts);
    let n = a.dim();
    let mut matvecs = run.matvecs;
    let mut out = Vec::with_capacity(shifts.len());
    let mut work = vec![0.0; n];
    for (j, (_, s)) in shifted.iter().enumerate() {
        let (re, im) = (&vecs[2 * j], &vecs[2 * j + 1]);
        // x = -s(T) y, Horner in T on real and imaginary parts
        let top = s.len() - 1;
        let mut acc_re: Vec<f64> = re.iter().zip(im).map(|(r, i)| (s[top] * Complex64::new(*r, *i)).re).collect();
        let mut acc_im: Vec<f64> = re.iter().zip(im).map(|(r, i)| (s[top] * Complex64::new(*r, *i)).im).collect();
        if let Some(p) = precond {
            for k in (0..top).rev() {
                p.apply_t(a, &acc_re, &mut work);
                core::mem::swap(&mut acc_re, &mut work);
                p.apply_t(a, &acc_im, &mut work);
                core::mem::swap(&mut acc_im, &mut work);
                matvecs += 2;
                for i in 0..n {
                    let t = s[k] * Complex64::new(re[i], im[i]);
                    acc_re[i] += t.re;
                    acc_im[i] += t.im;
                }
            }
        }
        out.push(acc_re.iter().zip(&acc_im).map(|(&r, &i)| -Complex64::new(r, i)).collect());
    }
    let stats = SolveStats {
        iterations: run.iterations,
        matvecs,
        residuals: run.residuals.clone(),
        preconditioned: precond.is_some(),
    };
    Ok((out, stats))
}
