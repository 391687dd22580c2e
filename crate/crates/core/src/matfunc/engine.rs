use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use super::bounds::{estimate_spectral_bounds, SpectralBounds};
use super::contour::ContourNodes;
use super::deflation::{compute_deflation_basis_seeded, DeflationBasis};
use super::for_each_shift;
use super::functions::{DirectForm, SpectralFunction};
use super::lanczos::{KrylovOperator, KrylovRun, Projected, RunControl};
use super::poly::{chebyshev_iterations, PolyPreconditioner};
use crate::error::{check_dim, invalid, Result};
use crate::linalg::{axpy, conjugate_gradient, norm2};
use crate::sparse::{LinearOperator, SparseOperator};

/// Tuning knobs of the matrix-function engine.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineSettings {
    /// Quadrature points `P` on the contour.
    pub quad_points: usize,
    /// Number of deflated eigenpairs; `None` deflates detected null vectors only.
    pub deflation: Option<usize>,
    /// Relative residual required of every shifted system.
    pub tol: f64,
    pub max_iter: usize,
    /// Degree of the polynomial preconditioner; 0 disables it.
    pub poly_degree: usize,
    /// The preconditioner is considered only when `kappa` reaches this value.
    pub poly_min_kappa: f64,
    /// Store the Krylov basis (fast) or regenerate it for the final combination (lean).
    pub keep_basis: bool,
    /// Also evaluate with `P/2` points and report the difference.
    pub check_refinement: bool,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            quad_points: 32,
            deflation: None,
            tol: 1e-9,
            max_iter: 20_000,
            poly_degree: 8,
            poly_min_kappa: 100.0,
            keep_basis: true,
            check_refinement: false,
        }
    }
}

impl EngineSettings {
    pub fn validate(&self) -> Result<()> {
        if self.quad_points == 0 {
            return Err(invalid("quad_points", "must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(invalid("tol", "must lie in (0, 1)"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        if !(self.poly_min_kappa >= 1.0) {
            return Err(invalid("poly_min_kappa", "must be at least 1"));
        }
        Ok(())
    }
}

/// Accuracy concerns raised during an evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    /// A quadrature node sat close to a singularity of the elliptic functions.
    NearPole,
    /// Halving the number of quadrature points changed the result by `gap` (relative).
    RefinementDisagreement { gap: f64 },
}

/// Counters from one engine call.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ApplyStats {
    pub iterations: usize,
    pub matvecs: usize,
    /// Relative residuals of the shifted systems.
    pub residuals: Vec<f64>,
    pub quad_points: usize,
    pub deflated: usize,
    pub preconditioned: bool,
    /// Relative change when `P` is halved, if requested.
    pub refinement_gap: Option<f64>,
    pub warnings: Vec<Warning>,
}

impl ApplyStats {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, &r| m.max(r))
    }
}

#[derive(Debug, Clone)]
struct Preconditioning {
    poly: PolyPreconditioner,
    /// Per pole: `eta_j` and the coefficients of `s_j`.
    shifted: Vec<(Complex64, Vec<Complex64>)>,
}

/// Evaluates `f(A) b` for a fixed symmetric positive semi-definite `A` and
/// many functions and vectors. Deflation, bounds, poles and the optional
/// preconditioner are computed once.
#[derive(Debug, Clone)]
pub struct MatFuncEngine {
    matrix: SparseOperator,
    settings: EngineSettings,
    deflation: DeflationBasis,
    bounds: Option<SpectralBounds>,
    nodes: Option<ContourNodes>,
    /// Poles for `P/2`, when refinement checking is on.
    coarse: Option<ContourNodes>,
    precond: Option<Preconditioning>,
}

/// Distance from `z` to the real interval `[lo, hi]`.
fn distance_to_interval(z: Complex64, lo: f64, hi: f64) -> f64 {
    let dx = if z.re < lo {
        lo - z.re
    } else if z.re > hi {
        z.re - hi
    } else {
        0.0
    };
    dx.hypot(z.im)
}

impl MatFuncEngine {
    /// Deflates the constant vector when it spans a null space (Neumann operators).
    pub fn new(matrix: SparseOperator, settings: EngineSettings) -> Result<Self> {
        let n = matrix.dim();
        let constant = vec![1.0 / (n as f64).sqrt(); n];
        Self::with_seeds(matrix, settings, &[constant])
    }

    /// Like [`MatFuncEngine::new`], trying `seeds` as known eigenvectors. With
    /// automatic deflation, every seed that is a null vector gets deflated.
    pub fn with_seeds(matrix: SparseOperator, settings: EngineSettings, seeds: &[Vec<f64>]) -> Result<Self> {
        settings.validate()?;
        let anorm = matrix.gershgorin_upper().abs().max(matrix.max_abs());
        let ell = match settings.deflation {
            Some(ell) => ell,
            None => seeds
                .iter()
                .filter(|s| {
                    s.len() == matrix.dim() && {
                        let ns = norm2(s);
                        ns > 0.0
                            && matrix
                                .mul_vec(s)
                                .map(|y| norm2(&y) <= 1e-10 * anorm * ns)
                                .unwrap_or(false)
                    }
                })
                .count(),
        };
        let deflation = compute_deflation_basis_seeded(&matrix, ell, seeds)?;
        Self::with_deflation(matrix, settings, deflation)
    }

    /// Uses a precomputed deflation basis.
    pub fn with_deflation(matrix: SparseOperator, settings: EngineSettings, deflation: DeflationBasis) -> Result<Self> {
        settings.validate()?;
        check_dim(matrix.dim(), deflation.dim())?;
        if deflation.is_complete() {
            return Ok(Self {
                matrix,
                settings,
                deflation,
                bounds: None,
                nodes: None,
                coarse: None,
                precond: None,
            });
        }
        let bounds = estimate_spectral_bounds(&matrix, &deflation)?;
        Self::with_bounds(matrix, settings, deflation, bounds)
    }

    /// Uses precomputed deflation and spectral bounds (raw, before widening).
    pub fn with_bounds(
        matrix: SparseOperator,
        settings: EngineSettings,
        deflation: DeflationBasis,
        bounds: SpectralBounds,
    ) -> Result<Self> {
        settings.validate()?;
        check_dim(matrix.dim(), deflation.dim())?;
        let widened = bounds.widened();
        let nodes = ContourNodes::new(widened, settings.quad_points)?;
        let coarse = if settings.check_refinement && settings.quad_points >= 2 {
            Some(ContourNodes::new(widened, settings.quad_points / 2)?)
        } else {
            None
        };
        let mut engine = Self {
            matrix,
            settings,
            deflation,
            bounds: Some(bounds),
            nodes: Some(nodes),
            coarse,
            precond: None,
        };
        engine.precond = engine.choose_preconditioner()?;
        Ok(engine)
    }

    fn all_poles(&self) -> Vec<Complex64> {
        let mut poles = Vec::new();
        if let Some(n) = &self.nodes {
            poles.extend_from_slice(&n.poles);
        }
        if let Some(c) = &self.coarse {
            poles.extend_from_slice(&c.poles);
        }
        poles
    }

    /// Fits the polynomial preconditioner and keeps it only when it keeps the
    /// preconditioned operator positive and the estimated work goes down.
    fn choose_preconditioner(&self) -> Result<Option<Preconditioning>> {
        let (Some(bounds), true) = (self.bounds, self.settings.poly_degree > 0) else {
            return Ok(None);
        };
        if bounds.kappa() < self.settings.poly_min_kappa {
            return Ok(None);
        }
        let widened = bounds.widened();
        let poly = PolyPreconditioner::fit(widened, self.settings.poly_degree)?;
        let (r_lo, r_hi) = poly.preconditioned_range();
        if !(r_lo > 0.0) {
            return Ok(None);
        }
        let poles = self.all_poles();
        let shifted: Vec<(Complex64, Vec<Complex64>)> = poles.iter().map(|&z| poly.shifted(z)).collect();
        let tol = self.settings.tol;
        let plain_iters = poles
            .iter()
            .map(|&z| chebyshev_iterations(z, widened.lambda_min, widened.lambda_max, tol))
            .fold(0.0, f64::max);
        let pre_iters = shifted
            .iter()
            .map(|(eta, _)| chebyshev_iterations(*eta, r_lo, r_hi, tol))
            .fold(0.0, f64::max);
        let n = self.matrix.dim() as f64;
        let matvec = 2.0 * self.matrix.nnz() as f64 + 3.0 * n;
        let per_iter_vector = 12.0 * n + 10.0 * poles.len() as f64;
        let degree = self.settings.poly_degree as f64;
        let plain_cost = plain_iters * (matvec + per_iter_vector);
        let pre_cost = pre_iters * ((degree + 1.0) * matvec + per_iter_vector) + degree * matvec;
        if pre_cost.is_finite() && pre_cost < 0.9 * plain_cost {
            Ok(Some(Preconditioning { poly, shifted }))
        } else {
            Ok(None)
        }
    }

    pub fn matrix(&self) -> &SparseOperator {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn settings(&self) -> &EngineSettings {
        &self.settings
    }

    pub fn deflation(&self) -> &DeflationBasis {
        &self.deflation
    }

    /// Raw spectral bounds of the retained spectrum (`None` under full deflation).
    pub fn bounds(&self) -> Option<SpectralBounds> {
        self.bounds
    }

    pub fn contour(&self) -> Option<&ContourNodes> {
        self.nodes.as_ref()
    }

    pub fn preconditioner(&self) -> Option<&PolyPreconditioner> {
        self.precond.as_ref().map(|p| &p.poly)
    }

    pub fn apply(&self, f: &SpectralFunction, b: &[f64]) -> Result<Vec<f64>> {
        self.apply_with_stats(f, b).map(|(v, _)| v)
    }

    pub fn apply_with_stats(&self, f: &SpectralFunction, b: &[f64]) -> Result<(Vec<f64>, ApplyStats)> {
        let (mut out, stats) = self.apply_many(core::slice::from_ref(f), b)?;
        Ok((out.pop().expect("one function in, one result out"), stats))
    }

    /// `f_i(A) b` for every `f_i`, sharing one Krylov basis.
    pub fn apply_many(&self, fs: &[SpectralFunction], b: &[f64]) -> Result<(Vec<Vec<f64>>, ApplyStats)> {
        check_dim(self.dim(), b.len())?;
        for f in fs {
            f.validate()?;
        }
        let n = self.dim();
        let mut stats = ApplyStats {
            quad_points: self.settings.quad_points,
            deflated: self.deflation.len(),
            ..ApplyStats::default()
        };
        let mut results: Vec<Option<Vec<f64>>> = vec![None; fs.len()];

        // polynomial and resolvent forms of A need no quadrature
        for (slot, f) in results.iter_mut().zip(fs) {
            if let Some(form) = f.direct_form() {
                *slot = Some(self.apply_direct(form, b, &mut stats)?);
            }
        }
        let spectral: Vec<usize> = (0..fs.len()).filter(|&i| results[i].is_none()).collect();
        if spectral.is_empty() {
            return Ok((results.into_iter().map(Option::unwrap).collect(), stats));
        }

        // exact part on the deflated eigenpairs
        let coef = self.deflation.coefficients(b);
        let mut b_hat = b.to_vec();
        for (q, &c) in self.deflation.vectors().iter().zip(&coef) {
            axpy(-c, q, &mut b_hat);
        }
        for &i in &spectral {
            let mut r = vec![0.0; n];
            for ((q, &c), &lambda) in self.deflation.vectors().iter().zip(&coef).zip(self.deflation.values()) {
                axpy(fs[i].eval_real(lambda) * c, q, &mut r);
            }
            results[i] = Some(r);
        }
        let (Some(nodes), Some(bounds)) = (&self.nodes, self.bounds) else {
            return Ok((results.into_iter().map(Option::unwrap).collect(), stats));
        };
        let bh_norm = norm2(&b_hat);
        if bh_norm == 0.0 {
            return Ok((results.into_iter().map(Option::unwrap).collect(), stats));
        }
        if nodes.near_pole {
            stats.warnings.push(Warning::NearPole);
        }

        let poles = self.all_poles();
        let p_main = nodes.len();
        let mut weights: Vec<Vec<Complex64>> = Vec::with_capacity(spectral.len());
        let mut coarse_weights: Vec<Vec<Complex64>> = Vec::new();
        for &i in &spectral {
            weights.push(nodes.weights(&fs[i])?);
            if let Some(c) = &self.coarse {
                coarse_weights.push(c.weights(&fs[i])?);
            }
        }
        let etas: Vec<Complex64> = match &self.precond {
            Some(p) => p.shifted.iter().map(|s| s.0).collect(),
            None => poles.clone(),
        };

        // Stop once the quadrature sum is accurate too: the error of each
        // solution is at most its residual over the distance to the spectrum.
        let dist: Vec<f64> = nodes
            .poles
            .iter()
            .map(|&z| distance_to_interval(z, bounds.lambda_min, bounds.lambda_max).max(f64::MIN_POSITIVE))
            .collect();
        let f_scale: Vec<f64> = spectral
            .iter()
            .map(|&i| {
                (0..=8)
                    .map(|k| {
                        let l = bounds.lambda_min * (bounds.lambda_max / bounds.lambda_min).powf(k as f64 / 8.0);
                        fs[i].eval_real(l).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        let tol = self.settings.tol;
        let accept = |res: &[f64]| {
            weights.iter().zip(&f_scale).all(|(w, &fsc)| {
                let est: f64 = (0..p_main).map(|j| w[j].norm() * res[j] / dist[j]).sum();
                est <= tol * fsc
            })
        };
        let projected = Projected {
            a: &self.matrix,
            defl: &self.deflation,
        };
        let op = KrylovOperator {
            a: &self.matrix,
            defl: Some(&self.deflation),
            precond: self.precond.as_ref().map(|p| &p.poly),
        };
        let run = KrylovRun::run(
            &op,
            &b_hat,
            &etas,
            &RunControl {
                tol,
                max_iter: self.settings.max_iter,
                keep_basis: self.settings.keep_basis,
                accept: &accept,
            },
        )?;
        stats.iterations = run.iterations;
        stats.matvecs = run.matvecs;
        stats.residuals = run.residuals[..p_main].to_vec();
        stats.preconditioned = self.precond.is_some();

        let coeffs = for_each_shift(etas.len(), |j| run.coefficients(etas[j]));
        // each output is Im sum_j w_j x_j with x_j = -s_j(T) V c_j; gather the
        // real coefficient vectors g_k of every power T^k
        let degree = self.precond.as_ref().map_or(0, |p| p.shifted[0].1.len() - 1);
        let m = run.alpha.len();
        let combine = |w: &[Complex64], range: core::ops::Range<usize>| -> Vec<Vec<f64>> {
            (0..=degree)
                .map(|k| {
                    let mut g = vec![Complex64::new(0.0, 0.0); m];
                    for (j, wj) in range.clone().zip(w) {
                        let s_k = match &self.precond {
                            Some(p) => p.shifted[j].1[k],
                            None => Complex64::new(1.0, 0.0),
                        };
                        let factor = -(*wj) * s_k;
                        for (gi, ci) in g.iter_mut().zip(&coeffs[j]) {
                            *gi += factor * ci;
                        }
                    }
                    g.into_iter().map(|v| v.im).collect()
                })
                .collect()
        };
        let mut all_g: Vec<Vec<f64>> = Vec::new();
        for w in &weights {
            all_g.extend(combine(w, 0..p_main));
        }
        for w in &coarse_weights {
            all_g.extend(combine(w, p_main..poles.len()));
        }
        let expanded = run.expand(&op, &all_g);
        let mut work = vec![0.0; n];
        let mut contour_parts: Vec<Vec<f64>> = Vec::with_capacity(expanded.len() / (degree + 1));
        for group in expanded.chunks(degree + 1) {
            // Horner in T: u_0 + T (u_1 + T (...))
            let mut acc = group[degree].clone();
            if let Some(p) = &self.precond {
                for k in (0..degree).rev() {
                    p.poly.apply_t(&projected, &acc, &mut work);
                    stats.matvecs += 1;
                    for ((a, w), u) in acc.iter_mut().zip(&work).zip(&group[k]) {
                        *a = w + u;
                    }
                }
            }
            contour_parts.push(acc);
        }
        let n_spec = spectral.len();
        for (slot, &i) in spectral.iter().enumerate() {
            let r = results[i].as_mut().expect("filled with the deflated part");
            axpy(1.0, &contour_parts[slot], r);
        }
        if self.coarse.is_some() {
            let mut worst: f64 = 0.0;
            for slot in 0..n_spec {
                let fine = &contour_parts[slot];
                let coarse = &contour_parts[n_spec + slot];
                let diff: Vec<f64> = fine.iter().zip(coarse).map(|(a, b)| a - b).collect();
                let scale = norm2(results[spectral[slot]].as_ref().unwrap()).max(f64::MIN_POSITIVE);
                worst = worst.max(norm2(&diff) / scale);
            }
            stats.refinement_gap = Some(worst);
            if worst > tol.sqrt() {
                stats.warnings.push(Warning::RefinementDisagreement { gap: worst });
            }
        }
        Ok((results.into_iter().map(Option::unwrap).collect(), stats))
    }

    fn apply_direct(&self, form: DirectForm, b: &[f64], stats: &mut ApplyStats) -> Result<Vec<f64>> {
        match form {
            DirectForm::Zero => Ok(vec![0.0; b.len()]),
            DirectForm::Linear(c) => {
                let mut y = self.matrix.mul_vec(b)?;
                stats.matvecs += 1;
                y.iter_mut().for_each(|v| *v *= c);
                Ok(y)
            }
            DirectForm::ShiftedInverse(c) => {
                if c == 0.0 {
                    return Ok(b.to_vec());
                }
                let shifted = ShiftedIdentity { a: &self.matrix, c };
                let mut x = b.to_vec();
                let report = conjugate_gradient(&shifted, b, &mut x, self.settings.tol * 0.1, self.settings.max_iter)?;
                stats.iterations += report.iterations;
                stats.matvecs += report.iterations + 1;
                stats.residuals.push(report.relative_residual);
                Ok(x)
            }
        }
    }
}

/// `I + c A`.
struct ShiftedIdentity<'a> {
    a: &'a SparseOperator,
    c: f64,
}

impl LinearOperator for ShiftedIdentity<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.a.matvec(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi + self.c * *yi;
        }
    }
}

/// `f(A) b` with a given deflation basis, `points` quadrature points and
/// Lanczos tolerance `tol`; other settings take their defaults.
pub fn matfunc_apply(
    f: &SpectralFunction,
    a: &SparseOperator,
    b: &[f64],
    defl: &DeflationBasis,
    points: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let settings = EngineSettings {
        quad_points: points,
        deflation: Some(defl.len()),
        tol,
        ..EngineSettings::default()
    };
    MatFuncEngine::with_deflation(a.clone(), settings, defl.clone())?.apply(f, b)
}
