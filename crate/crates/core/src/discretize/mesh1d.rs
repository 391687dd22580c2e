use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Uniform 1D grid. Node `i` sits at `origin + i * spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D {
    n_nodes: usize,
    spacing: f64,
    origin: f64,
}

impl Mesh1D {
    pub fn new(n_nodes: usize, spacing: f64, origin: f64) -> Result<Self> {
        if n_nodes < 2 {
            return Err(Error::InvalidMesh(alloc::format!(
                "a 1D mesh needs at least 2 nodes, got {n_nodes}"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidMesh(alloc::format!("node spacing must be positive, got {spacing}")));
        }
        Ok(Self {
            n_nodes,
            spacing,
            origin,
        })
    }

    /// Grid covering `[origin, origin + length]` with the given spacing;
    /// the node count is rounded to the nearest integer.
    pub fn covering(length: f64, spacing: f64, origin: f64) -> Result<Self> {
        let cells = libm::round(length / spacing);
        if !(cells >= 1.0) {
            return Err(Error::InvalidMesh(alloc::format!(
                "length {length} and spacing {spacing} give no cells"
            )));
        }
        Self::new(cells as usize + 1, spacing, origin)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn length(&self) -> f64 {
        self.spacing * (self.n_nodes - 1) as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.coordinate(i)).collect()
    }

    /// Coordinates padded to 3D points on the x axis.
    pub fn points(&self) -> Vec<[f64; 3]> {
        (0..self.n_nodes).map(|i| [self.coordinate(i), 0.0, 0.0]).collect()
    }
}

/// Second-difference Laplacian `-d²/dx²` with the symmetric Neumann closure.
///
/// Interior rows are `(-1, 2, -1)/dx²`; the two boundary rows are `(1, -1)/dx²`
/// and `(-1, 1)/dx²`, so every row sums to zero.
pub fn build_laplacian_1d(mesh: &Mesh1D) -> SparseOperator {
    let n = mesh.n_nodes;
    let h2 = 1.0 / (mesh.spacing * mesh.spacing);
    let mut triplets = Vec::with_capacity(3 * n);
    for i in 0..n {
        let mut diag = 0.0;
        if i > 0 {
            triplets.push((i, i - 1, -h2));
            diag += h2;
        }
        if i + 1 < n {
            triplets.push((i, i + 1, -h2));
            diag += h2;
        }
        triplets.push((i, i, diag));
    }
    SparseOperator::from_triplets(n, &triplets)
}
