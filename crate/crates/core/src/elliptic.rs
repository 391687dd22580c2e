//! Complete elliptic integrals and Jacobi elliptic functions for real modulus.
//!
//! Real arguments go through the arithmetic-geometric mean and a descending
//! Landen sweep. Complex arguments `x + iy` combine the real values at `x`
//! (modulus `k`) and at `y` (complementary modulus `k'`) through the addition
//! theorems, which is all the conformal map needs: its nodes lie on a fixed
//! horizontal line.

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};

const MAX_AGM_STEPS: usize = 64;

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= 2.0 * f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complementary modulus `sqrt(1 - k^2)`, computed as `sqrt((1-k)(1+k))`.
pub fn complementary_modulus(k: f64) -> f64 {
    ((1.0 - k) * (1.0 + k)).sqrt()
}

/// `K(k)`, the complete elliptic integral of the first kind with modulus `k`.
pub fn complete_elliptic_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::EllipticDomain(k));
    }
    Ok(complete_elliptic_k_from_complement(complementary_modulus(k)))
}

/// `K(k)` given the complementary modulus `k' = sqrt(1 - k^2)` directly,
/// which keeps full accuracy when `k` is close to 1.
pub fn complete_elliptic_k_from_complement(kp: f64) -> f64 {
    core::f64::consts::FRAC_PI_2 / agm(1.0, kp)
}

/// `(K(k), K'(k)) = (K(k), K(k'))`.
pub fn complete_elliptic_pair(k: f64, kp: f64) -> (f64, f64) {
    (complete_elliptic_k_from_complement(kp), complete_elliptic_k_from_complement(k))
}

/// Values of `sn`, `cn`, `dn` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiElliptic {
    pub sn: Complex64,
    pub cn: Complex64,
    pub dn: Complex64,
    /// Set when the argument is close enough to a pole that the values carry
    /// reduced relative accuracy.
    pub near_pole: bool,
}

/// Real `(sn, cn, dn)(u | k)`; `kp` is the complementary modulus.
pub fn jacobi_real(u: f64, k: f64, kp: f64) -> (f64, f64, f64) {
    if k == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    if kp == 0.0 {
        let t = u.tanh();
        let sech = 1.0 / u.cosh();
        return (t, sech, sech);
    }
    let mut a = [0.0; MAX_AGM_STEPS + 1];
    let mut c = [0.0; MAX_AGM_STEPS + 1];
    a[0] = 1.0;
    c[0] = k;
    let mut b = kp;
    let mut n = 0;
    while c[n].abs() > f64::EPSILON && n < MAX_AGM_STEPS {
        let an = a[n];
        a[n + 1] = 0.5 * (an + b);
        c[n + 1] = 0.5 * (an - b);
        b = (an * b).sqrt();
        n += 1;
    }
    let mut phi = libm::ldexp(a[n] * u, n as i32);
    let mut prev = phi;
    for m in (1..=n).rev() {
        prev = phi;
        phi = 0.5 * (phi + (c[m] * phi.sin() / a[m]).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = if n == 0 { 1.0 } else { cn / (prev - phi).cos() };
    (sn, cn, dn)
}

/// Jacobi elliptic functions at complex `tau` for real modulus `0 <= k < 1`.
pub fn jacobi_elliptic(tau: Complex64, k: f64) -> Result<JacobiElliptic> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::EllipticDomain(k));
    }
    Ok(jacobi_elliptic_with_complement(tau, k, complementary_modulus(k)))
}

/// As [`jacobi_elliptic`], with the complementary modulus supplied by the caller.
pub fn jacobi_elliptic_with_complement(tau: Complex64, k: f64, kp: f64) -> JacobiElliptic {
    let (s, c, d) = jacobi_real(tau.re, k, kp);
    if tau.im == 0.0 {
        return JacobiElliptic {
            sn: Complex64::new(s, 0.0),
            cn: Complex64::new(c, 0.0),
            dn: Complex64::new(d, 0.0),
            near_pole: false,
        };
    }
    let (s1, c1, d1) = jacobi_real(tau.im, kp, k);
    let den = c1 * c1 + k * k * s * s * s1 * s1;
    JacobiElliptic {
        sn: Complex64::new(s * d1, c * d * s1 * c1) / den,
        cn: Complex64::new(c * c1, -s * d * s1 * d1) / den,
        dn: Complex64::new(d * c1 * d1, -k * k * s * c * s1) / den,
        near_pole: den < 1e-10,
    }
}
