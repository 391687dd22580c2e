//! The two-region variable-order fractional Laplacian.
//!
//! With principal order `p` on the principal region and correction order `c`
//! on the other one, the operator is
//!
//! ```text
//! L u = A^{p/2} u + E_c (A^{c/2} - A^{p/2}) u
//! ```
//!
//! where `E_c` keeps the rows of the correction region. The implicit scheme
//! needs `f_a(A) = D (A^{p/2} - A^{c/2})` and `f_b(A) = (I + D dt A^{p/2})^{-1}`.
//!
//! The principal order is the larger of the two. This keeps the explicit part
//! of the Picard iteration bounded by one on every eigenvalue; for equal
//! orders, or when `alpha2 = 2 != alpha1`, it agrees with writing the operator
//! around region 1 resp. swapping the regions.

use alloc::vec;
use alloc::vec::Vec;

use crate::discretize::{Laplacian, Region, RegionPartition};
use crate::error::{check_dim, invalid, Result};
use crate::matfunc::{ApplyStats, EngineSettings, MatFuncEngine, SpectralFunction};

/// Piecewise constant fractional order `alpha(x)` over two regions.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalOrderField {
    alpha1: f64,
    alpha2: f64,
    partition: RegionPartition,
}

fn check_order(name: &'static str, alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(invalid(name, alloc::format!("{alpha} is outside (1, 2]")))
    }
}

impl FractionalOrderField {
    pub fn new(alpha1: f64, alpha2: f64, partition: RegionPartition) -> Result<Self> {
        check_order("alpha1", alpha1)?;
        check_order("alpha2", alpha2)?;
        Ok(Self {
            alpha1,
            alpha2,
            partition,
        })
    }

    /// One order everywhere.
    pub fn uniform(alpha: f64, n: usize) -> Result<Self> {
        Self::new(alpha, alpha, RegionPartition::uniform(n))
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn partition(&self) -> &RegionPartition {
        &self.partition
    }

    pub fn len(&self) -> usize {
        self.partition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partition.is_empty()
    }

    pub fn order(&self, region: Region) -> f64 {
        match region {
            Region::One => self.alpha1,
            Region::Two => self.alpha2,
        }
    }

    /// `alpha` at a node.
    pub fn alpha_at(&self, node: usize) -> f64 {
        self.order(self.partition.region_of(node))
    }

    /// Region whose order is treated implicitly (region 1 on ties).
    pub fn principal_region(&self) -> Region {
        if self.alpha2 > self.alpha1 {
            Region::Two
        } else {
            Region::One
        }
    }

    pub fn correction_region(&self) -> Region {
        self.principal_region().other()
    }

    pub fn principal_order(&self) -> f64 {
        self.order(self.principal_region())
    }

    pub fn correction_order(&self) -> f64 {
        self.order(self.correction_region())
    }

    /// No correction term: equal orders or an empty correction region.
    pub fn is_fixed_order(&self) -> bool {
        self.alpha1 == self.alpha2 || self.partition.indices(self.correction_region()).is_empty()
    }
}

/// The discrete variable-order operator together with its matrix-function engine.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct VoflOperator {
    laplacian: Laplacian,
    orders: FractionalOrderField,
    diffusivity: f64,
    engine: MatFuncEngine,
}

impl VoflOperator {
    /// Builds the engine for `laplacian`. With automatic deflation the constant
    /// mode is deflated when it spans the null space.
    pub fn new(laplacian: Laplacian, orders: FractionalOrderField, diffusivity: f64, settings: EngineSettings) -> Result<Self> {
        let seeds = [laplacian.constant_mode()];
        let engine = MatFuncEngine::with_seeds(laplacian.symmetric().clone(), settings, &seeds)?;
        Self::with_engine(laplacian, orders, diffusivity, engine)
    }

    /// Reuses an engine built for `laplacian.symmetric()`.
    pub fn with_engine(laplacian: Laplacian, orders: FractionalOrderField, diffusivity: f64, engine: MatFuncEngine) -> Result<Self> {
        check_dim(laplacian.dim(), orders.len())?;
        check_dim(laplacian.dim(), engine.dim())?;
        if !(diffusivity.is_finite() && diffusivity >= 0.0) {
            return Err(invalid("diffusivity", "must be finite and nonnegative"));
        }
        Ok(Self {
            laplacian,
            orders,
            diffusivity,
            engine,
        })
    }

    pub fn dim(&self) -> usize {
        self.laplacian.dim()
    }

    pub fn laplacian(&self) -> &Laplacian {
        &self.laplacian
    }

    pub fn orders(&self) -> &FractionalOrderField {
        &self.orders
    }

    /// Effective diffusivity `D` multiplying the operator in the PDE.
    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }

    pub fn engine(&self) -> &MatFuncEngine {
        &self.engine
    }

    /// Same matrices and engine, different orders or diffusivity.
    pub fn with_orders(&self, orders: FractionalOrderField, diffusivity: f64) -> Result<Self> {
        Self::with_engine(self.laplacian.clone(), orders, diffusivity, self.engine.clone())
    }

    fn half_orders(&self) -> (f64, f64) {
        (self.orders.principal_order() / 2.0, self.orders.correction_order() / 2.0)
    }

    /// `f(A) u` in physical space, through the symmetric form when mass scaled.
    fn apply_many(&self, fs: &[SpectralFunction], u: &[f64]) -> Result<(Vec<Vec<f64>>, ApplyStats)> {
        check_dim(self.dim(), u.len())?;
        let b = self.laplacian.to_symmetric_space(u);
        let (ys, stats) = self.engine.apply_many(fs, &b)?;
        Ok((ys.into_iter().map(|y| self.laplacian.from_symmetric_space(y)).collect(), stats))
    }

    fn mask_correction(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.orders.partition().select(self.orders.correction_region(), x, &mut out);
        out
    }

    /// `L u`.
    pub fn apply_vofl(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.apply_vofl_with_stats(u).map(|(y, _)| y)
    }

    pub fn apply_vofl_with_stats(&self, u: &[f64]) -> Result<(Vec<f64>, ApplyStats)> {
        let (p, c) = self.half_orders();
        let base = SpectralFunction::Power { exponent: p };
        if self.orders.is_fixed_order() {
            let (mut ys, stats) = self.apply_many(&[base], u)?;
            return Ok((ys.pop().expect("one result"), stats));
        }
        let diff = SpectralFunction::PowerDifference {
            coeff: 1.0,
            first: c,
            second: p,
        };
        let (ys, stats) = self.apply_many(&[base, diff], u)?;
        let mut y = ys[0].clone();
        for (yi, d) in y.iter_mut().zip(self.mask_correction(&ys[1])) {
            *yi += d;
        }
        Ok((y, stats))
    }

    /// `f_a(A) u = D (A^{p/2} - A^{c/2}) u`, one contour pass.
    pub fn apply_fa(&self, u: &[f64]) -> Result<Vec<f64>> {
        let (p, c) = self.half_orders();
        let f = SpectralFunction::PowerDifference {
            coeff: self.diffusivity,
            first: p,
            second: c,
        };
        let (mut ys, _) = self.apply_many(&[f], u)?;
        Ok(ys.pop().expect("one result"))
    }

    /// `E_c f_a(A) u`: the explicit correction of the implicit scheme.
    pub fn correction(&self, u: &[f64]) -> Result<(Vec<f64>, ApplyStats)> {
        check_dim(self.dim(), u.len())?;
        if self.orders.is_fixed_order() || self.diffusivity == 0.0 {
            return Ok((vec![0.0; u.len()], ApplyStats::default()));
        }
        let (p, c) = self.half_orders();
        let f = SpectralFunction::PowerDifference {
            coeff: self.diffusivity,
            first: p,
            second: c,
        };
        let (mut ys, stats) = self.apply_many(&[f], u)?;
        Ok((self.mask_correction(&ys.pop().expect("one result")), stats))
    }

    /// `f_b(A) rhs = (I + D dt A^{p/2})^{-1} rhs`. A principal order of 2 is a
    /// single sparse symmetric positive definite solve.
    pub fn solve_fb(&self, rhs: &[f64], dt: f64) -> Result<Vec<f64>> {
        self.solve_fb_with_stats(rhs, dt).map(|(y, _)| y)
    }

    pub fn solve_fb_with_stats(&self, rhs: &[f64], dt: f64) -> Result<(Vec<f64>, ApplyStats)> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", "time step must be positive"));
        }
        let (p, _) = self.half_orders();
        let f = SpectralFunction::ResolventOfPower {
            coeff: self.diffusivity * dt,
            exponent: p,
        };
        let (mut ys, stats) = self.apply_many(&[f], rhs)?;
        Ok((ys.pop().expect("one result"), stats))
    }

    /// `(I + D dt A^{p/2}) u`, the inverse of [`VoflOperator::solve_fb`].
    pub fn apply_fb_inverse(&self, u: &[f64], dt: f64) -> Result<Vec<f64>> {
        let (p, _) = self.half_orders();
        let (mut ys, _) = self.apply_many(&[SpectralFunction::Power { exponent: p }], u)?;
        let mut y = ys.pop().expect("one result");
        let c = self.diffusivity * dt;
        for (yi, ui) in y.iter_mut().zip(u) {
            *yi = ui + c * *yi;
        }
        Ok(y)
    }
}

/// `L u` for a prepared operator.
pub fn apply_vofl(op: &VoflOperator, u: &[f64]) -> Result<Vec<f64>> {
    op.apply_vofl(u)
}

/// `f_a(A) u`.
pub fn apply_fa(op: &VoflOperator, u: &[f64]) -> Result<Vec<f64>> {
    op.apply_fa(u)
}

/// `f_b(A) rhs` for step `dt`.
pub fn solve_fb(op: &VoflOperator, rhs: &[f64], dt: f64) -> Result<Vec<f64>> {
    op.solve_fb(rhs, dt)
}
