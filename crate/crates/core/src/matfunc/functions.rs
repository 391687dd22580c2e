use num_complex::Complex64;
use num_traits::Float;

use crate::error::{invalid, Result};

/// Scalar functions the engine can apply to a symmetric positive semi-definite matrix.
///
/// All are analytic off the closed negative real axis (principal branch) and
/// real on the positive real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralFunction {
    /// `z^p`.
    Power { exponent: f64 },
    /// `1 / (1 + c z^p)`.
    ResolventOfPower { coeff: f64, exponent: f64 },
    /// `c (z^p - z^q)`.
    PowerDifference { coeff: f64, first: f64, second: f64 },
}

/// What a function collapses to when every exponent is exactly one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum DirectForm {
    /// `c A b` (`c = 0` gives the zero vector).
    Linear(f64),
    /// `(I + c A)^{-1} b`.
    ShiftedInverse(f64),
    Zero,
}

fn cpow(z: Complex64, p: f64) -> Complex64 {
    if p == 1.0 {
        z
    } else if z == Complex64::new(0.0, 0.0) {
        Complex64::new(0.0, 0.0)
    } else {
        z.powf(p)
    }
}

fn rpow(x: f64, p: f64) -> f64 {
    let x = x.max(0.0);
    if x == 0.0 {
        0.0
    } else {
        x.powf(p)
    }
}

impl SpectralFunction {
    /// `z^{alpha/2}`.
    pub fn fractional_power(alpha: f64) -> Self {
        Self::Power { exponent: alpha / 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let exps: &[f64] = match self {
            Self::Power { exponent } => &[*exponent][..],
            Self::ResolventOfPower { coeff, exponent } => {
                if !(coeff.is_finite() && *coeff >= 0.0) {
                    return Err(invalid("coeff", "resolvent coefficient must be finite and nonnegative"));
                }
                &[*exponent][..]
            }
            Self::PowerDifference { coeff, first, second } => {
                if !coeff.is_finite() {
                    return Err(invalid("coeff", "coefficient must be finite"));
                }
                return [*first, *second]
                    .iter()
                    .try_for_each(|&p| check_exponent(p));
            }
        };
        exps.iter().try_for_each(|&p| check_exponent(p))
    }

    /// Value at a complex point off the negative real axis.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match *self {
            Self::Power { exponent } => cpow(z, exponent),
            Self::ResolventOfPower { coeff, exponent } => (cpow(z, exponent) * coeff + 1.0).inv(),
            Self::PowerDifference { coeff, first, second } => (cpow(z, first) - cpow(z, second)) * coeff,
        }
    }

    /// Value at a real eigenvalue; negative rounding noise is clamped to zero
    /// and the continuous extension is used at zero.
    pub fn eval_real(&self, lambda: f64) -> f64 {
        match *self {
            Self::Power { exponent } => rpow(lambda, exponent),
            Self::ResolventOfPower { coeff, exponent } => 1.0 / (1.0 + coeff * rpow(lambda, exponent)),
            Self::PowerDifference { coeff, first, second } => coeff * (rpow(lambda, first) - rpow(lambda, second)),
        }
    }

    pub(crate) fn direct_form(&self) -> Option<DirectForm> {
        match *self {
            Self::Power { exponent } if exponent == 1.0 => Some(DirectForm::Linear(1.0)),
            Self::ResolventOfPower { coeff, .. } if coeff == 0.0 => Some(DirectForm::ShiftedInverse(0.0)),
            Self::ResolventOfPower { coeff, exponent } if exponent == 1.0 => Some(DirectForm::ShiftedInverse(coeff)),
            Self::PowerDifference { coeff, first, second } if coeff == 0.0 || first == second => Some(DirectForm::Zero),
            Self::PowerDifference { coeff, first, second } if first == 1.0 && second == 1.0 => Some(DirectForm::Linear(coeff)),
            _ => None,
        }
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(invalid("exponent", alloc::format!("must be positive and finite, got {p}")))
    }
}
