use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use super::bounds::SpectralBounds;
use super::functions::SpectralFunction;
use crate::elliptic::{complete_elliptic_pair, jacobi_elliptic_with_complement};
use crate::error::{invalid, Error, Result};

/// Poles of the midpoint rule on the conformally mapped contour. Independent
/// of the function being applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourNodes {
    pub bounds: SpectralBounds,
    pub modulus: f64,
    pub complementary_modulus: f64,
    /// `K(k)` and `K'(k)`.
    pub big_k: f64,
    pub big_kp: f64,
    /// Midpoints `tau_j` on the line `Im tau = K'/2`.
    pub tau: Vec<Complex64>,
    /// `z(tau_j)`, all in the open upper half plane.
    pub poles: Vec<Complex64>,
    /// `-(h / pi) z'(tau_j)`; multiply by `f(z_j)` to get a weight.
    pub measure: Vec<Complex64>,
    /// Some node sat close to a pole of the elliptic functions.
    pub near_pole: bool,
}

/// Midpoint quadrature for `f(A) b ~ Im sum_j w_j (z_j I - A)^{-1} b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourQuadrature {
    pub nodes: ContourNodes,
    pub weights: Vec<Complex64>,
}

impl ContourNodes {
    /// `points` nodes for a contour around `[bounds.lambda_min, bounds.lambda_max]`.
    pub fn new(bounds: SpectralBounds, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(invalid("quad_points", "at least one quadrature point is required"));
        }
        let k = bounds.modulus();
        let kp = bounds.complementary_modulus();
        if !(k > 0.0) {
            return Err(invalid(
                "bounds",
                "the contour needs lambda_min < lambda_max; widen the interval",
            ));
        }
        let (big_k, big_kp) = complete_elliptic_pair(k, kp);
        let h = 2.0 * big_k / points as f64;
        let scale = (bounds.lambda_min * bounds.lambda_max).sqrt();
        let mut tau = Vec::with_capacity(points);
        let mut poles = Vec::with_capacity(points);
        let mut measure = Vec::with_capacity(points);
        let mut near_pole = false;
        for j in 1..=points {
            let t = Complex64::new(-big_k + big_k * (2 * j - 1) as f64 / points as f64, big_kp / 2.0);
            let e = jacobi_elliptic_with_complement(t, k, kp);
            near_pole |= e.near_pole;
            let denom = -(e.sn * k) + 1.0;
            let z = (e.sn * k + 1.0) / denom * scale;
            let dz = e.cn * e.dn * (2.0 * k * scale) / (denom * denom);
            tau.push(t);
            poles.push(z);
            measure.push(dz * (-h / PI));
        }
        Ok(Self {
            bounds,
            modulus: k,
            complementary_modulus: kp,
            big_k,
            big_kp,
            tau,
            poles,
            measure,
            near_pole,
        })
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// Weights `w_j = -(h/pi) f(z_j) z'(tau_j)`.
    pub fn weights(&self, f: &SpectralFunction) -> Result<Vec<Complex64>> {
        self.poles
            .iter()
            .zip(&self.measure)
            .enumerate()
            .map(|(index, (&z, &m))| {
                let w = f.eval(z) * m;
                if w.re.is_finite() && w.im.is_finite() {
                    Ok(w)
                } else {
                    Err(Error::NonFiniteFunction { index })
                }
            })
            .collect()
    }
}

impl ContourQuadrature {
    pub fn points(&self) -> usize {
        self.nodes.len()
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.nodes.poles
    }

    /// The rule applied to a scalar: approximates `f(lambda)` for `lambda`
    /// inside the enclosed interval.
    pub fn scalar(&self, lambda: f64) -> f64 {
        self.nodes
            .poles
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| (w / (z - lambda)).im)
            .sum()
    }
}

/// Conformal-map midpoint quadrature for `f` around `bounds` with `points` nodes.
pub fn build_contour(f: &SpectralFunction, bounds: SpectralBounds, points: usize) -> Result<ContourQuadrature> {
    f.validate()?;
    let nodes = ContourNodes::new(bounds, points)?;
    let weights = nodes.weights(f)?;
    Ok(ContourQuadrature { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_near_one() {
        let eps = 1e-3;
        let q = build_contour(
            &SpectralFunction::Power { exponent: 0.5 },
            SpectralBounds::new(1.0 - eps, 1.0 + eps).unwrap(),
            16,
        )
        .unwrap();
        assert!((q.scalar(1.0) - 1.0).abs() < 1e-12, "{}", q.scalar(1.0));
    }

    #[test]
    fn poles_off_the_real_axis() {
        let q = build_contour(
            &SpectralFunction::Power { exponent: 0.75 },
            SpectralBounds::new(1e-3, 400.0).unwrap(),
            32,
        )
        .unwrap();
        assert!(q.poles().iter().all(|z| z.im > 0.0));
        assert!(!q.nodes.near_pole);
    }

    #[test]
    fn single_point_is_finite() {
        let q = build_contour(
            &SpectralFunction::Power { exponent: 0.6 },
            SpectralBounds::new(0.5, 2.0).unwrap(),
            1,
        )
        .unwrap();
        assert!(q.scalar(1.0).is_finite());
    }

    #[test]
    fn geometric_convergence_on_scalars() {
        let bounds = SpectralBounds::new(1.0, 1e4).unwrap();
        let f = SpectralFunction::Power { exponent: 0.75 };
        let lambdas: Vec<f64> = (0..=40).map(|i| 10f64.powf(4.0 * i as f64 / 40.0)).collect();
        let err = |p: usize| {
            let q = build_contour(&f, bounds, p).unwrap();
            lambdas
                .iter()
                .map(|&l| ((q.scalar(l) - l.powf(0.75)) / l.powf(0.75)).abs())
                .fold(0.0, f64::max)
        };
        let (e8, e16, e32, e64) = (err(8), err(16), err(32), err(64));
        assert!(e16 < e8 / 10.0 && e32 < e16 / 1e4 && e64 < e32 / 1e4, "{e8:e} {e16:e} {e32:e} {e64:e}");
        assert!(e64 < 1e-10);
    }

    #[test]
    fn resolvent_function() {
        let f = SpectralFunction::ResolventOfPower {
            coeff: 0.25,
            exponent: 0.75,
        };
        let q = build_contour(&f, SpectralBounds::new(0.5, 50.0).unwrap(), 32).unwrap();
        for &l in &[0.5, 1.0, 4.0, 49.0] {
            assert!((q.scalar(l) - f.eval_real(l)).abs() < 1e-12);
        }
    }
}
