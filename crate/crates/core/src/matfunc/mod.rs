//! `f(A) b` for sparse symmetric positive semi-definite `A`.
//!
//! The smallest eigenpairs (always including a Neumann null vector) are
//! deflated and handled exactly. The rest of the spectrum is enclosed by a
//! contour obtained from a conformal map of an annulus, whose midpoint rule
//! converges geometrically in the number of poles. Every pole needs a shifted
//! solve; all of them share one Lanczos basis, optionally built for a
//! polynomially preconditioned operator.

mod bounds;
mod contour;
mod deflation;
mod eigs;
mod engine;
mod functions;
mod lanczos;
mod poly;

pub use bounds::{estimate_spectral_bounds, SpectralBounds, LOWER_SAFETY, UPPER_SAFETY};
pub use contour::{build_contour, ContourNodes, ContourQuadrature};
pub use deflation::{compute_deflation_basis, compute_deflation_basis_seeded, DeflationBasis};
pub use engine::{matfunc_apply, ApplyStats, EngineSettings, MatFuncEngine, Warning};
pub use functions::SpectralFunction;
pub use lanczos::{shifted_lanczos_solve, SolveStats};
pub use poly::PolyPreconditioner;

use alloc::vec::Vec;

/// Runs `f` for every shift index and returns the results in index order.
#[cfg(feature = "parallel")]
pub(crate) fn for_each_shift<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_shift<T>(count: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..count).map(f).collect()
}
