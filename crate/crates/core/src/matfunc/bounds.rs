use num_traits::Float;

use super::deflation::DeflationBasis;
use super::eigs::{lanczos_extremes, ExtremesRequest, START_SEED};
use crate::error::{check_dim, invalid, Error, Result};
use crate::sparse::SparseOperator;

/// Widening applied before the bounds are handed to the conformal map.
pub const LOWER_SAFETY: f64 = 0.99;
pub const UPPER_SAFETY: f64 = 1.01;

const MAX_LANCZOS: usize = 2000;

/// Estimated extent of the retained (non-deflated) spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl SpectralBounds {
    pub fn new(lambda_min: f64, lambda_max: f64) -> Result<Self> {
        if !(lambda_min > 0.0 && lambda_min <= lambda_max && lambda_max.is_finite()) {
            return Err(invalid(
                "bounds",
                alloc::format!("need 0 < lambda_min <= lambda_max, got [{lambda_min}, {lambda_max}]"),
            ));
        }
        Ok(Self { lambda_min, lambda_max })
    }

    pub fn kappa(&self) -> f64 {
        self.lambda_max / self.lambda_min
    }

    /// Elliptic modulus `(sqrt(kappa) - 1) / (sqrt(kappa) + 1)`.
    pub fn modulus(&self) -> f64 {
        let s = self.kappa().sqrt();
        (s - 1.0) / (s + 1.0)
    }

    /// Complementary modulus, `2 kappa^{1/4} / (sqrt(kappa) + 1)`, computed
    /// without cancellation.
    pub fn complementary_modulus(&self) -> f64 {
        let s = self.kappa().sqrt();
        2.0 * s.sqrt() / (s + 1.0)
    }

    /// The interval the contour must enclose.
    pub fn widened(&self) -> Self {
        Self {
            lambda_min: self.lambda_min * LOWER_SAFETY,
            lambda_max: self.lambda_max * UPPER_SAFETY,
        }
    }
}

/// Extremal eigenvalues of `a` on the complement of the deflation space, by
/// Lanczos with full reorthogonalization.
pub fn estimate_spectral_bounds(a: &SparseOperator, defl: &DeflationBasis) -> Result<SpectralBounds> {
    check_dim(a.dim(), defl.dim())?;
    if defl.is_complete() {
        return Err(invalid("ell", "the deflation basis spans the whole space; no spectrum is retained"));
    }
    let tol = |theta: f64, norm: f64| (1e-4 * theta.abs()).max(1e-10 * norm);
    let ext = lanczos_extremes(
        a,
        &ExtremesRequest {
            against: defl.vectors(),
            n_small: 1,
            want_vectors: false,
            small_tol: &tol,
            large_rel_tol: 1e-8,
            max_iter: MAX_LANCZOS,
            seed: START_SEED.rotate_left(17),
        },
    )?;
    let lambda_min = ext.small[0];
    let lambda_max = ext.largest;
    if !(lambda_min > 1e-13 * lambda_max) {
        return Err(Error::SingularDeflatedOperator { lambda_min, lambda_max });
    }
    SpectralBounds::new(lambda_min, lambda_max)
}
