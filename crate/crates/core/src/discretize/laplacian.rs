use alloc::vec::Vec;
use num_traits::Float;

use super::tet::MassStiffness;
use crate::error::{check_dim, Error, Result};
use crate::linalg::norm2;
use crate::sparse::SparseOperator;

/// Diagonal scalings `M^{1/2}` and `M^{-1/2}` of a lumped mass matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MassScaling {
    pub sqrt_mass: Vec<f64>,
    pub inv_sqrt_mass: Vec<f64>,
}

/// A symmetric positive semi-definite Laplacian representation `S`, optionally
/// standing in for a mass-weighted operator `A = M^{-1} K` through
/// `S = M^{-1/2} K M^{-1/2}`. In that case `f(A) b = M^{-1/2} f(S) M^{1/2} b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    matrix: SparseOperator,
    scaling: Option<MassScaling>,
}

impl From<SparseOperator> for Laplacian {
    fn from(matrix: SparseOperator) -> Self {
        Self { matrix, scaling: None }
    }
}

impl Laplacian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// The symmetric matrix the spectral engine works with.
    pub fn symmetric(&self) -> &SparseOperator {
        &self.matrix
    }

    pub fn scaling(&self) -> Option<&MassScaling> {
        self.scaling.as_ref()
    }

    /// `M^{1/2} b` (identity without mass scaling).
    pub fn to_symmetric_space(&self, b: &[f64]) -> Vec<f64> {
        match &self.scaling {
            Some(s) => b.iter().zip(&s.sqrt_mass).map(|(x, m)| x * m).collect(),
            None => b.to_vec(),
        }
    }

    /// `M^{-1/2} x` (identity without mass scaling).
    pub fn from_symmetric_space(&self, mut x: Vec<f64>) -> Vec<f64> {
        if let Some(s) = &self.scaling {
            for (xi, m) in x.iter_mut().zip(&s.inv_sqrt_mass) {
                *xi *= m;
            }
        }
        x
    }

    /// `A u` for the physical operator.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), u.len())?;
        let y = self.matrix.mul_vec(&self.to_symmetric_space(u))?;
        Ok(self.from_symmetric_space(y))
    }

    /// Null vector the Neumann problem would have: `M^{1/2} 1` (or `1`), normalized.
    pub fn constant_mode(&self) -> Vec<f64> {
        let mut v = self.to_symmetric_space(&alloc::vec![1.0; self.dim()]);
        let nrm = norm2(&v);
        v.iter_mut().for_each(|x| *x /= nrm);
        v
    }

    /// True when the constant field is (numerically) annihilated, i.e. the
    /// operator carries Neumann conditions and has a zero eigenvalue.
    pub fn has_constant_null_space(&self) -> bool {
        let v = self.constant_mode();
        let y = self.matrix.mul_vec(&v).expect("dimension matches");
        let scale = self.matrix.gershgorin_upper().abs().max(f64::MIN_POSITIVE);
        norm2(&y) <= 1e-10 * scale
    }
}

/// `S = M^{-1/2} K M^{-1/2}`, similar to `M^{-1} K`, with both scalings kept.
pub fn symmetrize(ms: &MassStiffness) -> Result<Laplacian> {
    check_dim(ms.stiffness.dim(), ms.mass.len())?;
    if let Some((node, &value)) = ms.mass.iter().enumerate().find(|(_, &m)| !(m > 0.0)) {
        return Err(Error::NonPositiveMass { node, value });
    }
    let sqrt_mass: Vec<f64> = ms.mass.iter().map(|m| m.sqrt()).collect();
    let inv_sqrt_mass: Vec<f64> = sqrt_mass.iter().map(|m| 1.0 / m).collect();
    Ok(Laplacian {
        matrix: ms.stiffness.scale_symmetric(&inv_sqrt_mass),
        scaling: Some(MassScaling {
            sqrt_mass,
            inv_sqrt_mass,
        }),
    })
}
