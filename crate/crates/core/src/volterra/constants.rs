//! A-priori bounds of the contraction argument and the admissible horizon.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::problem::TransformedProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsLedger {
    /// `E0 ..= E10`.
    pub e: [f64; 11],
    /// `F0 ..= F10`.
    pub f: [f64; 11],
    pub m: f64,
    pub h: f64,
    pub r: f64,
    pub sigma_star: f64,
    /// Printed jump coefficient `2 / (2 - D)` that multiplies both bound sums.
    pub jump: f64,
    pub d: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub g_norm: f64,
}

/// One admissibility condition `coef * sigma^power <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Inequality {
    pub name: &'static str,
    pub coef: f64,
    pub power: f64,
    pub rhs: f64,
}

impl Inequality {
    pub fn lhs(&self, sigma: f64) -> f64 {
        self.coef * sigma.powf(self.power)
    }

    /// Holds up to a relative slack `rel` on the right-hand side.
    pub fn holds(&self, sigma: f64, rel: f64) -> bool {
        self.lhs(sigma) <= self.rhs * (1.0 + rel)
    }

    /// Largest sigma satisfying this inequality alone.
    pub fn bound(&self) -> f64 {
        if self.coef <= 0.0 {
            f64::INFINITY
        } else {
            (self.rhs / self.coef).powf(1.0 / self.power)
        }
    }
}

impl ConstantsLedger {
    pub fn e_bound_sum(&self) -> f64 {
        let e = &self.e;
        e[0] + e[2] + e[3] + e[4] + e[5] + e[7] + e[8] + e[9] + e[10]
    }

    pub fn f_bound_sum(&self) -> f64 {
        self.f.iter().sum()
    }

    /// The seven horizon conditions; the certified horizon is the largest sigma meeting all.
    pub fn inequalities(&self) -> Vec<Inequality> {
        let (m, h, d, beta, g) = (self.m, self.h, self.d, self.beta, self.g_norm);
        let lip0 = beta + d * g + m / h;
        vec![
            Inequality { name: "sigma<=1/M", coef: m, power: 1.0, rhs: 1.0 },
            Inequality { name: "y1 box", coef: 2.0 * (1.0 + beta) * (1.0 + d * m / (beta * beta)), power: 1.0, rhs: self.c2 },
            Inequality { name: "y0 box", coef: 2.0 * lip0, power: 1.0, rhs: self.c1 },
            Inequality { name: "y0 Lipschitz", coef: m / (h * d) * lip0, power: 1.0, rhs: 1.0 },
            Inequality {
                name: "y1 Lipschitz",
                coef: 2.0 * m * (beta + 1.0) / (beta * beta) * (1.0 + d * m / (beta * beta)),
                power: 1.0,
                rhs: 1.0,
            },
            Inequality { name: "self-map", coef: self.jump * self.e_bound_sum(), power: 0.5, rhs: 1.0 },
            Inequality { name: "contraction", coef: self.jump * self.f_bound_sum(), power: 0.5, rhs: 1.0 },
        ]
    }

    /// Names of the conditions violated at `sigma` (relative slack `rel`).
    pub fn violations(&self, sigma: f64, rel: f64) -> Vec<&'static str> {
        self.inequalities().into_iter().filter(|q| !q.holds(sigma, rel)).map(|q| q.name).collect()
    }
}

/// Evaluate every bound, `M`, `H`, `R` and `sigma*` for the given data.
pub fn compute_constants(tp: &TransformedProblem) -> Result<ConstantsLedger> {
    let (c1, c2, d, beta) = (tp.c1, tp.c2, tp.d, tp.beta);
    let (u0, du0, g) = (tp.norms.u0, tp.norms.du0, tp.norms.g);
    let sp = PI.sqrt();
    let jump = 2.0 / (2.0 - d);
    let h = 1.0;
    let big = u0 + beta;
    let grow = (big * (c2 - c1) / d).exp();

    let e1 = grow * (du0 + big * big / d);
    let e6 = grow * big;
    let m = 1.0 + jump * (e1 + e6);
    let r = 2.0 + m * (1.5 * c2 - 0.5 * c1);

    let p32 = |num: f64, den: f64| (num / (E * den * den)).powf(1.5);
    let e0 = big * big * (c2 - c1) / d * ((8.0 / (E * (c2 - 2.0 * c1).powi(2))).sqrt() + (8.0 / (E * (c2 + 2.0 * c1).powi(2))).sqrt());
    let e2 = d * m / (4.0 * sp) * (2.0 * (1.0 + beta) * (1.0 + m / (beta * beta)) + 3.0 * c2 * (2.0 / (3.0 * E * c2 * c2)).powf(1.5));
    let e3_part = |w: f64| 9.0 * (c2 + c1).powi(2) / (32.0 * sp) * (40.0 / (E * w * w)).powf(2.5) + p32(24.0, w) / (4.0 * sp);
    let e3 = m * (e3_part(c2 - 3.0 * c1) + e3_part(c2 + c1));
    let pair24 = p32(24.0, c2 - 3.0 * c1) + p32(24.0, c2 + c1);
    let e4 = 3.0 * m * beta * (c1 + c2) / (8.0 * sp) * pair24;
    let e5 = 3.0 * r * g * beta * (c1 + c2) / (8.0 * sp) * pair24;
    let e7 = 2.0 * d * m / sp;
    let lip0 = beta + d * g + m / h;
    let e8 = d * m / (4.0 * sp) * (2.0 * lip0 + 3.0 * c1 * (2.0 / (3.0 * E * c1 * c1)).powf(1.5));
    let e9 = 2.0 * beta * m / sp;
    let e10 = 2.0 * beta * r * g / sp;

    let b2 = beta * beta;
    let f0 = 3.0 * d * (c2 + c1) * (beta + 1.0) / (8.0 * sp * b2) * (p32(24.0, c2 - 2.0 * c1) + p32(24.0, c2 + 2.0 * c1));
    let f1 = 2.0 / sp * e1;
    let f2 = d / (4.0 * sp) * (2.0 * (1.0 + beta) * (1.0 + m / b2) + 3.0 * c2 * (2.0 / (3.0 * E * c2 * c2)).powf(1.5))
        + d.powf(-0.5) / sp * (d * (beta + 1.0) / b2 + 2.0 * (beta + 1.0).powi(2) / b2 * (1.0 + d * m / b2).powi(2))
        + (6.0 / (E * c2 * c2)).powf(1.5) * (18.0 * c2 * c2 + 1.0) / (4.0 * sp) * 2.0 * d * (beta + 1.0) / b2;
    let e32 = E.powf(1.5);
    let (s3, s6) = (3f64.sqrt(), 6f64.sqrt());
    let w3 = (c2 - 3.0 * c1).powi(3);
    let f31 = 1.0 / (sp * e32)
        * (s6 * (3.0 * c2 - c1).powi(2) / (16.0 * w3) + 27.0 * s3 / 4.0 + 12.0 * s6 / w3 + 6.0 * s3 / (c2 + c1).powi(3));
    let f32 = 12.0 * s6 / (sp * e32) * (1.0 / w3 + 9.0 / 8.0 + (3.0 * c2 - c1).powi(2) / (8.0 * w3) + 1.0 / (c2 + c1).powi(2));
    let f3 = m * beta * (f31 + f32);
    let f4 = beta * r * g * (f31 + f32);
    let f51 = s6 / (PI * E).sqrt() * (1.0 / (c2 - 3.0 * c1).powi(2) + 1.0 / (c2 + c1).powi(2));
    let f5 = m * (f31 + f32) + f51;
    let f6 = 2.0 / (d * sp) * grow * big;
    let f7 = beta * m * 6f64.powf(1.5) * d / (sp * e32) * ((3.0 * c2 - c1) / w3 + 3.0 / (c2 + c1).powi(2));
    let f8 = d.sqrt() / (4.0 * sp) * (6.0 * m + 3.0 / (c1 * c1) * (2.0 / (3.0 * E)).powf(1.5) + 6.0 * m / (c1 * c1) * (6.0 / E).powf(1.5));
    let f9 = d / (4.0 * sp) * (2.0 * (1.0 + beta) * (1.0 + m / b2) + 3.0 * c1 * (2.0 / (3.0 * E * c1 * c1)).powf(1.5))
        + d.powf(-0.5) / sp * (1.0 / h + 2.0 / h * lip0 * lip0)
        + (6.0 / (E * c1 * c1)).powf(1.5) * (18.0 * c1 * c1 + 1.0) / (4.0 * sp) / h;
    let f10 = beta * r * g * (lip0 * lip0 / (PI * d).sqrt() + (6.0 / E).powf(1.5) / (c1 * c1 * sp));

    let e = [e0, e1, e2, e3, e4, e5, e6, e7, e8, e9, e10];
    let f = [f0, f1, f2, f3, f4, f5, f6, f7, f8, f9, f10];
    for (name, vals) in [("E", &e), ("F", &f)] {
        if let Some(k) = vals.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::DegenerateGeometry(format!("{name}{k}")));
        }
    }
    if !(m.is_finite() && r.is_finite()) {
        return Err(Error::DegenerateGeometry("M".into()));
    }

    let mut ledger = ConstantsLedger { e, f, m, h, r, sigma_star: 0.0, jump, d, beta, c1, c2, g_norm: g };
    ledger.sigma_star = ledger.inequalities().iter().map(Inequality::bound).fold(f64::INFINITY, f64::min);
    if !(ledger.sigma_star.is_finite() && ledger.sigma_star > 0.0) {
        return Err(Error::DegenerateGeometry("sigma*".into()));
    }
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{C1Choice, PhysicalProblem, TransformedProblem};

    fn ledger() -> ConstantsLedger {
        let tp = TransformedProblem::build(&PhysicalProblem::trivial(1.0, 1.0, 1.0), C1Choice::Auto, 65).unwrap();
        compute_constants(&tp).unwrap()
    }

    #[test]
    fn structural_identities() {
        let l = ledger();
        assert_eq!(l.h, 1.0);
        assert!((l.m - (1.0 + l.jump * (l.e[1] + l.e[6]))).abs() < 1e-12 * l.m);
        assert!((l.r - (2.0 + l.m * (1.5 * l.c2 - 0.5 * l.c1))).abs() < 1e-12 * l.r);
        assert!((l.e[7] - 2.0 * l.d * l.m / PI.sqrt()).abs() < 1e-12 * l.e[7]);
    }

    #[test]
    fn sigma_star_is_sharp() {
        let l = ledger();
        assert!(l.violations(l.sigma_star, 1e-12).is_empty());
        assert!(!l.violations(1.01 * l.sigma_star, 0.0).is_empty());
    }
}
