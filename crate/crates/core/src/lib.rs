//! Sparse, dense-matrix-free solvers for reaction–diffusion equations driven by
//! a spatially variable-order fractional Laplacian.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure numerics:
//! operator assembly, matrix-function evaluation by conformally mapped contour
//! quadrature over shifted Lanczos solves, the two-region fractional operator,
//! implicit time stepping, and the Fisher and Beeler-Reuter reaction models.
//! File formats and the command line live in the companion `vofl-app` crate.
//!
//! Enable the `parallel` feature to spread per-shift work over a rayon pool.
//! Reductions always run in a fixed order, so results do not depend on the
//! thread count.

#![no_std]
#![cfg_attr(any(test, feature = "std"), allow(unused_imports))]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod discretize;
pub mod elliptic;
pub mod error;
pub mod ionic;
pub mod linalg;
pub mod matfunc;
pub mod sparse;
pub mod stepper;
pub mod vofl;

pub use error::{Error, Result};
pub use sparse::{LinearOperator, SparseOperator};
