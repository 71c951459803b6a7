//! Error-function helpers shared by the kernel integrals and the F-term sums.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function `exp(x^2) * erfc(x)`.
///
/// Finite for all finite `x >= 0`; for negative arguments the result grows
/// like `2 exp(x^2)` and overflows past `|x| ~ 26`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < 25.0 {
        return (x * x).exp() * libm::erfc(x);
    }
    erfcx_asymptotic(x)
}

/// Asymptotic series; truncation error below 1e-17 relative for `x >= 25`.
fn erfcx_asymptotic(x: f64) -> f64 {
    let r = 1.0 / (2.0 * x * x);
    let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r))));
    series / (x * SQRT_PI)
}

/// Upper Gaussian tail `P(Z > |x|)` of the standard normal.
#[inline]
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x.abs() * FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Probability mass `Phi(b) - Phi(a)` for `a <= b`, evaluated from the small
/// tails so that far-tail differences keep full relative precision.
///
/// `ta`, `tb` are the precomputed [`normal_tail`] values at `a` and `b`.
#[inline]
pub fn normal_mass(a: f64, ta: f64, b: f64, tb: f64) -> f64 {
    if a >= 0.0 {
        ta - tb
    } else if b <= 0.0 {
        tb - ta
    } else {
        1.0 - ta - tb
    }
}
