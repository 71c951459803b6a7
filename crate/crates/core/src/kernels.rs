//! Heat kernel on the line, its half-line Green (odd) and Neumann (even)
//! images, analytic derivatives, and closed-form time integrals over a source
//! moving along a straight segment.
//!
//! Throughout, `r` is the signed separation `x - xi` and `s = t - tau` the
//! elapsed time. The kernel is `k(r, s) = exp(-r^2 / (4 D s)) / (2 sqrt(pi D s))`
//! for `s > 0` and exactly zero for `s <= 0`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::special::{erfc, erfcx, SQRT_PI};

/// Exponents below this are flushed to an exact zero.
pub const UNDERFLOW_EXPONENT: f64 = -700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel query has a non-finite field `{0}`")]
    NonFinite(&'static str),
    #[error("diffusivity must be positive, got {0}")]
    NonPositiveDiffusivity(f64),
}

/// A point evaluation of a kernel: field point `(x, t)`, source `(xi, tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    pub x: f64,
    pub t: f64,
    pub xi: f64,
    pub tau: f64,
    pub d: f64,
}

impl KernelQuery {
    pub fn new(x: f64, t: f64, xi: f64, tau: f64, d: f64) -> Self {
        Self { x, t, xi, tau, d }
    }

    fn check(&self) -> Result<(), KernelError> {
        for (name, v) in [("x", self.x), ("t", self.t), ("xi", self.xi), ("tau", self.tau), ("D", self.d)] {
            if !v.is_finite() {
                return Err(KernelError::NonFinite(name));
            }
        }
        if self.d <= 0.0 {
            return Err(KernelError::NonPositiveDiffusivity(self.d));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageKind {
    /// `K(x) - K(-x)`: vanishes at `x = 0`.
    Green,
    /// `K(x) + K(-x)`: zero normal derivative at `x = 0`.
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    None,
    /// Derivative in the field point `x`.
    Dx,
    /// Derivative in the source point `xi`.
    Dxi,
    /// Derivative in the source time `tau`.
    Dtau,
    /// Second derivative in `x`.
    Dxx,
}

/// Free-space heat kernel as a function of separation and elapsed time.
#[inline]
pub fn heat(r: f64, s: f64, d: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let e = -r * r / (4.0 * d * s);
    if e < UNDERFLOW_EXPONENT {
        return 0.0;
    }
    e.exp() / (2.0 * (PI * d * s).sqrt())
}

/// `d k / d r`.
#[inline]
pub fn heat_dr(r: f64, s: f64, d: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    -r / (2.0 * d * s) * heat(r, s, d)
}

/// `d^2 k / d r^2`.
#[inline]
pub fn heat_drr(r: f64, s: f64, d: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    (r * r / (4.0 * d * d * s * s) - 1.0 / (2.0 * d * s)) * heat(r, s, d)
}

/// `d k / d s` at fixed separation.
#[inline]
pub fn heat_ds(r: f64, s: f64, d: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    (r * r / (4.0 * d * s * s) - 0.5 / s) * heat(r, s, d)
}

/// `K(x, t; xi, tau)`.
pub fn eval_k(q: &KernelQuery) -> Result<f64, KernelError> {
    q.check()?;
    Ok(heat(q.x - q.xi, q.t - q.tau, q.d))
}

/// Green or Neumann image kernel, or one of its analytic partial derivatives.
pub fn eval_image_kernel(kind: ImageKind, deriv: Deriv, q: &KernelQuery) -> Result<f64, KernelError> {
    q.check()?;
    let (rd, ri, s, d) = (q.x - q.xi, q.x + q.xi, q.t - q.tau, q.d);
    // Image term is K(-x, t; xi, tau) = k(x + xi, s).
    let sign = match kind {
        ImageKind::Green => -1.0,
        ImageKind::Neumann => 1.0,
    };
    let v = match deriv {
        Deriv::None => heat(rd, s, d) + sign * heat(ri, s, d),
        Deriv::Dx => heat_dr(rd, s, d) + sign * heat_dr(ri, s, d),
        Deriv::Dxi => -heat_dr(rd, s, d) + sign * heat_dr(ri, s, d),
        Deriv::Dtau => -(heat_ds(rd, s, d) + sign * heat_ds(ri, s, d)),
        Deriv::Dxx => heat_drr(rd, s, d) + sign * heat_drr(ri, s, d),
    };
    Ok(v)
}

/// Which one-sided value to take for a flux integral whose source passes
/// through the field point at the end of the time window (`eps == 0`, `s1 == 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    /// Direct (principal-value) evaluation on the source curve.
    Principal,
    /// Limit from the side `r > 0`, which includes the half-density jump.
    Positive,
}

/// `A(s) = exp(-eps v / D) erfc((eps - v s) / (2 sqrt(D s)))` for `eps >= 0`.
///
/// Evaluated through `erfcx` so that neither factor overflows.
fn flux_primitive(eps: f64, v: f64, s: f64, d: f64, lim: Limit) -> f64 {
    if s <= 0.0 {
        return if eps > 0.0 || lim == Limit::Positive { 0.0 } else { 1.0 };
    }
    let den = 2.0 * (d * s).sqrt();
    let za = (eps - v * s) / den;
    let zb = (eps + v * s) / den;
    let eb = -zb * zb;
    if za >= 0.0 {
        if eb < UNDERFLOW_EXPONENT {
            0.0
        } else {
            eb.exp() * erfcx(za)
        }
    } else {
        // za < 0 forces v > 0, so exp(-eps v / D) <= 1.
        let tail = if eb < UNDERFLOW_EXPONENT { 0.0 } else { eb.exp() * erfcx(-za) };
        2.0 * (-eps * v / d).exp() - tail
    }
}

/// `int_{s1}^{s2} (r / (2 D s)) k(r, s) ds` along `r = eps + v s`.
///
/// Equals `-int k_r ds`. Odd under `(eps, v) -> (-eps, -v)`.
pub fn flux_integral(eps: f64, v: f64, s1: f64, s2: f64, d: f64, lim: Limit) -> f64 {
    if s2 <= s1 {
        return 0.0;
    }
    if eps < 0.0 {
        return -flux_integral(-eps, -v, s1, s2, d, lim);
    }
    (flux_primitive(eps, v, s2, d, lim) - flux_primitive(eps, v, s1, d, lim)) / (2.0 * d)
}

/// Antiderivative `F(s)` of `k(eps + v s, s)` with `F(0) = 0`, for `eps >= 0`.
fn mass_primitive(eps: f64, v: f64, s: f64, d: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let rs = (d * s).sqrt();
    let delta = v * s.sqrt() / (2.0 * d.sqrt());
    let z0 = eps / (2.0 * rs);
    if delta.abs() < 1e-4 {
        // Series in delta around the frozen source.
        let g = (-z0 * z0).exp() / SQRT_PI;
        let e0 = erfc(z0);
        let e1 = -2.0 * g;
        let e2 = 4.0 * z0 * g;
        let e3 = 4.0 * (1.0 - 2.0 * z0 * z0) * g;
        let s0 = -e1 - 2.0 * z0 * e0;
        let s1 = 2.0 * z0 * e1 + 4.0 * z0 * z0 * e0;
        let s2 = -e3 / 6.0 - z0 * e2 - 4.0 * z0 * z0 * e1 - 16.0 / 3.0 * z0 * z0 * z0 * e0;
        return s.sqrt() / (2.0 * d.sqrt()) * (s0 + delta * (s1 + delta * s2));
    }
    let zb = (eps + v * s) / (2.0 * rs);
    let a = flux_primitive(eps, v, s, d, Limit::Principal);
    (a - erfc(zb)) / (2.0 * v)
}

/// `int_{s1}^{s2} k(eps + v s, s) ds`. Even under `(eps, v) -> (-eps, -v)`.
pub fn mass_integral(eps: f64, v: f64, s1: f64, s2: f64, d: f64) -> f64 {
    if s2 <= s1 {
        return 0.0;
    }
    let (eps, v) = if eps < 0.0 { (-eps, -v) } else { (eps, v) };
    mass_primitive(eps, v, s2, d) - mass_primitive(eps, v, s1, d)
}

/// Below this value of `v^2 s / (4 D)` the first moment is summed as a series.
const MOMENT_SERIES_LIMIT: f64 = 0.05;

/// `int_0^s sigma k(eps + v sigma, sigma) d sigma` for `eps >= 0` as a series in `v^2`.
///
/// With `a = eps / (2 sqrt D)`, `c = v / (2 sqrt D)` the integrand is
/// `exp(-2 a c) sigma^{1/2} exp(-a^2 / sigma) exp(-c^2 sigma) / (2 sqrt(pi D))`;
/// the last factor is expanded and `J_p = int sigma^p exp(-a^2 / sigma)` obeys
/// `(p + 1) J_p = s^{p+1} exp(-a^2 / s) - a^2 J_{p-1}`.
fn moment_series(eps: f64, v: f64, s: f64, d: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let sd = d.sqrt();
    let (a, c) = (eps / (2.0 * sd), v / (2.0 * sd));
    let x = a / s.sqrt();
    if -x * x < UNDERFLOW_EXPONENT {
        return 0.0;
    }
    let e = (-x * x).exp();
    // J_{-1/2} = 2 sqrt(s) exp(-x^2) (1 - sqrt(pi) x erfcx(x)).
    let mut j = 2.0 * s.sqrt() * e * (1.0 - SQRT_PI * x * erfcx(x));
    let mut pow = s.sqrt();
    let mut coef = 1.0;
    let mut sum = 0.0;
    for n in 0..40 {
        let p = n as f64 + 0.5;
        pow *= s;
        j = (pow * e - a * a * j) / (p + 1.0);
        let term = coef * j;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        coef *= -c * c / (n as f64 + 1.0);
    }
    (-2.0 * a * c).exp() * sum / (2.0 * (PI * d).sqrt())
}

/// `int_{s1}^{s2} s k(eps + v s, s) ds`, the first moment of [`mass_integral`].
///
/// Even under `(eps, v) -> (-eps, -v)`.
pub fn mass_moment(eps: f64, v: f64, s1: f64, s2: f64, d: f64) -> f64 {
    if s2 <= s1 {
        return 0.0;
    }
    let (eps, v) = if eps < 0.0 { (-eps, -v) } else { (eps, v) };
    if v * v * s2 / (4.0 * d) < MOMENT_SERIES_LIMIT {
        return moment_series(eps, v, s2, d) - moment_series(eps, v, s1, d);
    }
    // d/ds [sqrt(s) exp(-z^2)] links the moment to the mass and flux integrals.
    let m0 = mass_integral(eps, v, s1, s2, d);
    let f0 = flux_integral(eps, v, s1, s2, d, Limit::Principal);
    let sk = |s: f64| if s <= 0.0 { 0.0 } else { s * heat(eps + v * s, s, d) };
    4.0 * d / (v * v) * (m0 * (0.5 - eps * v / (4.0 * d)) + 0.5 * eps * f0 - (sk(s2) - sk(s1)))
}

/// `int_{s1}^{s2} s (r / (2 D s)) k(r, s) ds` along `r = eps + v s`, the first
/// moment of [`flux_integral`]. The jump at `s = 0` carries no moment, so both
/// limits agree. Odd under `(eps, v) -> (-eps, -v)`.
pub fn flux_moment(eps: f64, v: f64, s1: f64, s2: f64, d: f64) -> f64 {
    (eps * mass_integral(eps, v, s1, s2, d) + v * mass_moment(eps, v, s1, s2, d)) / (2.0 * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Gauss-Legendre on many panels after the substitution `s = u^2`,
    /// which removes the `s^{-1/2}` endpoint singularity.
    fn quad<F: Fn(f64) -> f64>(f: F, s1: f64, s2: f64) -> f64 {
        let (u1, u2) = (s1.sqrt(), s2.sqrt());
        let nodes = [
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (0.0, 0.568_888_888_888_888_9),
            (0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let panels = 4000;
        let hu = (u2 - u1) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let c = u1 + (p as f64 + 0.5) * hu;
            for &(x, w) in &nodes {
                let u = c + 0.5 * hu * x;
                acc += w * 0.5 * hu * f(u * u) * 2.0 * u;
            }
        }
        acc
    }

    #[test]
    fn flux_integral_matches_quadrature() {
        let d = 0.7;
        for &(eps, v) in &[(0.3, 0.5), (0.3, -2.0), (-0.2, 1.5), (0.05, 4.0), (1.0, 0.0), (0.01, -0.3)] {
            let (s1, s2) = (0.01, 0.2);
            let exact = flux_integral(eps, v, s1, s2, d, Limit::Principal);
            let num = quad(|s| {
                let r = eps + v * s;
                r / (2.0 * d * s) * heat(r, s, d)
            }, s1, s2);
            assert!((exact - num).abs() < 1e-10, "eps={eps} v={v}: {exact} vs {num}");
        }
    }

    #[test]
    fn mass_integral_matches_quadrature() {
        let d = 1.3;
        for &(eps, v) in &[(0.3, 0.5), (0.3, -2.0), (-0.2, 1.5), (0.0, 3.0), (0.2, 1e-6), (0.2, 0.0), (0.0, 0.0)] {
            let (s1, s2) = (0.0, 0.15);
            let exact = mass_integral(eps, v, s1, s2, d);
            let num = quad(|s| heat(eps + v * s, s, d), s1, s2);
            assert!((exact - num).abs() < 1e-10, "eps={eps} v={v}: {exact} vs {num}");
        }
    }

    #[test]
    fn moments_match_quadrature() {
        for &d in &[0.4, 1.0, 1.7] {
            for &(eps, v) in &[(0.3, 0.5), (0.3, -2.0), (-0.2, 1.5), (0.0, 3.0), (0.02, 1e-7), (0.2, 0.0), (0.0, 0.0), (0.05, -0.9), (0.01, 6.0)] {
                for &(s1, s2) in &[(0.0, 0.15), (0.01, 0.2), (1e-4, 3e-4)] {
                    let m = mass_moment(eps, v, s1, s2, d);
                    let mq = quad(|s| s * heat(eps + v * s, s, d), s1, s2);
                    assert!((m - mq).abs() < 1e-12 * (1.0 + s2), "mass d={d} eps={eps} v={v} [{s1},{s2}]: {m} vs {mq}");
                    let f = flux_moment(eps, v, s1, s2, d);
                    let fq = quad(|s| (eps + v * s) / (2.0 * d) * heat(eps + v * s, s, d), s1, s2);
                    assert!((f - fq).abs() < 1e-11, "flux d={d} eps={eps} v={v} [{s1},{s2}]: {f} vs {fq}");
                }
            }
        }
    }

    #[test]
    fn moment_is_continuous_across_series_switch() {
        let (eps, d, s1, s2) = (0.1, 1.0, 0.0, 0.2);
        // v^2 s2 / (4 D) crosses the limit at v = 1.
        let lo = mass_moment(eps, 1.0 - 1e-13, s1, s2, d);
        let hi = mass_moment(eps, 1.0 + 1e-13, s1, s2, d);
        assert!((lo - hi).abs() < 1e-15, "{lo} vs {hi}");
    }

    #[test]
    fn mass_series_is_continuous_at_switch() {
        let (eps, d, s) = (0.1, 1.0, 0.04);
        // delta = v sqrt(s) / (2 sqrt(D)) = v / 10 crosses 1e-4 at v = 1e-3.
        let lo = mass_primitive(eps, 0.999_999e-3, s, d);
        let hi = mass_primitive(eps, 1.000_001e-3, s, d);
        assert!((lo - hi).abs() < 1e-11);
    }

    #[test]
    fn flux_jump_is_half_over_d() {
        let d = 0.6;
        let (v, s2) = (0.8, 0.05);
        let principal = flux_integral(0.0, v, 0.0, s2, d, Limit::Principal);
        let positive = flux_integral(0.0, v, 0.0, s2, d, Limit::Positive);
        let near = flux_integral(1e-12, v, 0.0, s2, d, Limit::Principal);
        assert!((positive - principal - 1.0 / (2.0 * d)).abs() < 1e-12);
        assert!((near - positive).abs() < 1e-9);
    }

    #[test]
    fn zero_for_nonpositive_elapsed_time() {
        assert_eq!(eval_k(&KernelQuery::new(1.0, 1.0, 0.0, 2.0, 1.0)).unwrap(), 0.0);
        assert_eq!(eval_k(&KernelQuery::new(1.0, 1.0, 0.0, 1.0, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_queries() {
        assert!(eval_k(&KernelQuery::new(f64::NAN, 1.0, 0.0, 0.0, 1.0)).is_err());
        assert!(eval_k(&KernelQuery::new(0.0, 1.0, 0.0, 0.0, -1.0)).is_err());
    }
}
