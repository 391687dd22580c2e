use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use super::eigs::{lanczos_extremes, project_out, ExtremesRequest, START_SEED};
use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, dot, norm2, symmetric_eigen};
use crate::sparse::SparseOperator;

/// Matrices up to this size are deflated through a dense eigendecomposition.
const DENSE_LIMIT: usize = 200;
const MAX_LANCZOS: usize = 2000;
/// Eigenvalues below this fraction of `||A||` are rounding noise on a null
/// eigenvalue and are stored as exact zeros.
const NULL_FRACTION: f64 = 1e-12;

fn snap_null(lambda: f64, anorm: f64) -> f64 {
    if lambda.abs() <= NULL_FRACTION * anorm {
        0.0
    } else {
        lambda
    }
}

/// The `ell` smallest eigenpairs of a symmetric matrix, handled exactly by the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflationBasis {
    dim: usize,
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

impl DeflationBasis {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            values: Vec::new(),
            vectors: Vec::new(),
        }
    }

    /// Wraps known eigenpairs. Vectors must be orthonormal.
    pub fn from_pairs(dim: usize, values: Vec<f64>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != vectors.len() || vectors.iter().any(|v| v.len() != dim) {
            return Err(invalid("deflation", "eigenpair count or vector length is inconsistent"));
        }
        Ok(Self { dim, values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of deflated pairs, `ell`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.values.len() == self.dim
    }

    /// Eigenvalues in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// `Q^T x`.
    pub fn coefficients(&self, x: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|q| dot(q, x)).collect()
    }

    /// `x <- (I - Q Q^T) x`.
    pub fn project_out(&self, x: &mut [f64]) {
        project_out(x, &self.vectors);
    }

    /// `max |Q^T Q - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, qi) in self.vectors.iter().enumerate() {
            for (j, qj) in self.vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(qi, qj) - target).abs());
            }
        }
        worst
    }

    /// `||A q_i - lambda_i q_i||` per pair.
    pub fn residuals(&self, a: &SparseOperator) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(&l, q)| {
                let mut r = a.mul_vec(q).expect("dimension checked at construction");
                axpy(-l, q, &mut r);
                norm2(&r)
            })
            .collect()
    }
}

/// The `ell` smallest eigenpairs of `a`. A constant null vector is detected and
/// used exactly.
pub fn compute_deflation_basis(a: &SparseOperator, ell: usize) -> Result<DeflationBasis> {
    let n = a.dim();
    let constant = vec![1.0 / (n as f64).sqrt(); n];
    compute_deflation_basis_seeded(a, ell, &[constant])
}

/// As [`compute_deflation_basis`], with candidate eigenvectors to try first.
/// A seed is kept only when it is a unit eigenvector to working accuracy.
pub fn compute_deflation_basis_seeded(a: &SparseOperator, ell: usize, seeds: &[Vec<f64>]) -> Result<DeflationBasis> {
    let n = a.dim();
    if ell > n {
        return Err(invalid("ell", alloc::format!("cannot deflate {ell} eigenpairs of a {n}x{n} matrix")));
    }
    if ell == 0 {
        return Ok(DeflationBasis::empty(n));
    }
    let anorm = a.gershgorin_upper().abs().max(a.max_abs());
    if n <= DENSE_LIMIT {
        let (vals, vecs) = symmetric_eigen(n, &a.to_dense());
        let vectors = (0..ell)
            .map(|k| {
                let mut q: Vec<f64> = (0..n).map(|i| vecs[i * n + k]).collect();
                normalize_sign(&mut q);
                q
            })
            .collect();
        return Ok(DeflationBasis {
            dim: n,
            values: vals[..ell].iter().map(|&l| snap_null(l, anorm)).collect(),
            vectors,
        });
    }

    let mut values = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    for seed in seeds.iter().filter(|s| s.len() == n) {
        if values.len() == ell {
            break;
        }
        let mut q = seed.clone();
        project_out(&mut q, &vectors);
        let nq = norm2(&q);
        if nq == 0.0 {
            continue;
        }
        q.iter_mut().for_each(|x| *x /= nq);
        let aq = a.mul_vec(&q)?;
        let lambda = dot(&q, &aq);
        let mut r = aq;
        axpy(-lambda, &q, &mut r);
        if norm2(&r) <= 1e-12 * anorm {
            values.push(snap_null(lambda, anorm));
            vectors.push(q);
        }
    }
    let remaining = ell - values.len();
    if remaining > 0 {
        let tol = |_: f64, _: f64| 1e-9 * anorm;
        let ext = lanczos_extremes(
            a,
            &ExtremesRequest {
                against: &vectors,
                n_small: remaining,
                want_vectors: true,
                small_tol: &tol,
                large_rel_tol: f64::INFINITY,
                max_iter: MAX_LANCZOS,
                seed: START_SEED,
            },
        )?;
        for (l, mut q) in ext.small.into_iter().zip(ext.small_vectors) {
            normalize_sign(&mut q);
            values.push(snap_null(l, anorm));
            vectors.push(q);
        }
    }
    // seeds may be interleaved with Lanczos pairs; keep the ascending contract
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let basis = DeflationBasis {
        dim: n,
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: order.iter().map(|&i| vectors[i].clone()).collect(),
    };
    let worst = basis.residuals(a).into_iter().fold(0.0, f64::max);
    if worst > 1e-8 * anorm {
        return Err(Error::EigenNoConvergence {
            iterations: MAX_LANCZOS,
            residual: worst / anorm,
        });
    }
    Ok(basis)
}

/// Makes the largest-magnitude entry positive so results do not depend on
/// the eigensolver's sign choice.
fn normalize_sign(q: &mut [f64]) {
    let pivot = q.iter().fold(0.0_f64, |m, &v| if v.abs() > m.abs() { v } else { m });
    if pivot < 0.0 {
        q.iter_mut().for_each(|v| *v = -*v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_laplacian_1d, Mesh1D};

    #[test]
    fn empty_and_diagonal() {
        let a = SparseOperator::from_diagonal(&[3.0, 1.0, 2.0]);
        assert!(compute_deflation_basis(&a, 0).unwrap().is_empty());
        let d = compute_deflation_basis(&a, 2).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.values()[0] - 1.0).abs() < 1e-14);
        assert!((d.values()[1] - 2.0).abs() < 1e-14);
        assert!((d.vectors()[0][1] - 1.0).abs() < 1e-14);
        assert!((d.vectors()[1][2] - 1.0).abs() < 1e-14);
        assert!(compute_deflation_basis(&a, 4).is_err());
    }

    #[test]
    fn neumann_null_space_large() {
        let a = build_laplacian_1d(&Mesh1D::new(400, 0.1, 0.0).unwrap());
        let d = compute_deflation_basis(&a, 3).unwrap();
        let n = 400.0_f64;
        assert!(d.values()[0].abs() < 1e-12);
        for &x in &d.vectors()[0] {
            assert!((x - 1.0 / n.sqrt()).abs() < 1e-14);
        }
        // analytic Neumann eigenvalues (4/h^2) sin^2(k pi / 2N)
        for k in 1..3 {
            let exact = 4.0 / 0.01 * (k as f64 * core::f64::consts::PI / (2.0 * n)).sin().powi(2);
            assert!((d.values()[k] - exact).abs() < 1e-8 * 400.0, "k = {k}");
        }
        assert!(d.orthogonality_defect() < 1e-10);
    }
}
