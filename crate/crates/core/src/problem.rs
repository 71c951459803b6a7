//! Physical problem data, its validation, and the transformed initial data on
//! the heat-equation frame.

use std::fmt;

use crate::error::{Error, Result};
use crate::quadrature::{gauss8, simpson_uniform};
use crate::table::Table;

pub const COMPATIBILITY_TOL: f64 = 1e-8;
pub const FRONT_LEVEL_TOL: f64 = 1e-10;
/// Flux sup-norm window for the constants ledger.
pub const FLUX_NORM_WINDOW: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub enum FluxForm {
    Constant { value: f64 },
    /// `a + c t`
    Linear { a: f64, c: f64 },
    /// `a exp(c t)`
    Exponential { a: f64, c: f64 },
    /// Samples on a time grid starting at `t = 0`.
    Tabulated(Table),
}

/// Boundary flux `g(t)`, optionally shifted in time for restarted segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Flux {
    pub form: FluxForm,
    pub shift: f64,
}

impl Flux {
    pub fn new(form: FluxForm) -> Result<Self> {
        if let FluxForm::Tabulated(t) = &form {
            if t.first_x() != 0.0 {
                return Err(Error::InvalidInput("tabulated flux must start at t = 0".into()));
            }
        }
        Ok(Self { form, shift: 0.0 })
    }

    pub fn constant(value: f64) -> Self {
        Self { form: FluxForm::Constant { value }, shift: 0.0 }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    fn eval_raw(&self, t: f64) -> f64 {
        match &self.form {
            FluxForm::Constant { value } => *value,
            FluxForm::Linear { a, c } => a + c * t,
            FluxForm::Exponential { a, c } => a * (c * t).exp(),
            FluxForm::Tabulated(tab) => tab.eval(t),
        }
    }

    fn integral_raw(&self, t: f64) -> f64 {
        match &self.form {
            FluxForm::Constant { value } => value * t,
            FluxForm::Linear { a, c } => a * t + 0.5 * c * t * t,
            FluxForm::Exponential { a, c } => {
                if c.abs() * t.abs() < 1e-8 {
                    a * t * (1.0 + 0.5 * c * t)
                } else {
                    a * (c * t).exp_m1() / c
                }
            }
            FluxForm::Tabulated(tab) => tab.integral_to(t),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_raw(t + self.shift)
    }

    /// `int_0^t g`.
    pub fn integral(&self, t: f64) -> f64 {
        if self.shift == 0.0 {
            self.integral_raw(t)
        } else {
            self.integral_raw(t + self.shift) - self.integral_raw(self.shift)
        }
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self { form: self.form.clone(), shift: self.shift + by }
    }

    /// `true` unless the flux is a piecewise-linear table.
    pub fn is_smooth(&self) -> bool {
        !matches!(self.form, FluxForm::Tabulated(_))
    }

    /// `sup |g|` over `[0, window]`.
    pub fn sup_norm(&self, window: f64) -> f64 {
        let mut m = 0.0f64;
        for k in 0..=1000 {
            m = m.max(self.eval(window * k as f64 / 1000.0).abs());
        }
        if let FluxForm::Tabulated(tab) = &self.form {
            for &x in tab.xs() {
                let local = x - self.shift;
                if (0.0..=window).contains(&local) {
                    m = m.max(self.eval(local).abs());
                }
            }
        }
        m
    }
}

/// Initial profile `u0` on `[0, b]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant { value: f64 },
    /// `beta + (b - x)(alpha + gamma x)`.
    Quadratic { beta: f64, b: f64, alpha: f64, gamma: f64 },
    /// `beta + amp cos(pi x / (2 b))`.
    Cosine { beta: f64, b: f64, amp: f64 },
    Tabulated(Table),
}

impl Profile {
    /// Quadratic profile meeting `u0(b) = beta` with prescribed slope at the origin.
    pub fn quadratic(beta: f64, b: f64, alpha: f64, slope_at_origin: f64) -> Self {
        let gamma = (slope_at_origin + alpha) / b;
        Self::Quadratic { beta, b, alpha, gamma }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Quadratic { beta, b, alpha, gamma } => beta + (b - x) * (alpha + gamma * x),
            Self::Cosine { beta, b, amp } => beta + amp * (std::f64::consts::FRAC_PI_2 * x / b).cos(),
            Self::Tabulated(t) => t.eval(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Quadratic { b, alpha, gamma, .. } => -(alpha + gamma * x) + (b - x) * gamma,
            Self::Cosine { b, amp, .. } => {
                let k = std::f64::consts::FRAC_PI_2 / b;
                -amp * k * (k * x).sin()
            }
            Self::Tabulated(t) => {
                if x <= t.first_x() {
                    t.left_derivative()
                } else {
                    t.slope(x)
                }
            }
        }
    }

    /// Breakpoints used to integrate `1 / u0`: table rows, or a uniform grid.
    fn quadrature_grid(&self, b: f64) -> Vec<f64> {
        match self {
            Self::Tabulated(t) => t.xs().to_vec(),
            _ => (0..=512).map(|k| b * k as f64 / 512.0).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalProblem {
    pub d: f64,
    pub beta: f64,
    pub b: f64,
    pub flux: Flux,
    pub u0: Profile,
}

impl PhysicalProblem {
    /// Constant state `u0 = beta` with zero flux.
    pub fn trivial(d: f64, beta: f64, b: f64) -> Self {
        Self { d, beta, b, flux: Flux::zero(), u0: Profile::Constant { value: beta } }
    }

    /// Sup-norm of `u0` and `u0'` over a fine sample of `[0, b]`.
    pub fn profile_norms(&self) -> (f64, f64) {
        let (mut mu, mut md) = (0.0f64, 0.0f64);
        let mut xs: Vec<f64> = (0..=2000).map(|k| self.b * k as f64 / 2000.0).collect();
        if let Profile::Tabulated(t) = &self.u0 {
            xs.extend(t.xs().iter().copied().filter(|x| (0.0..=self.b).contains(x)));
        }
        for x in xs {
            mu = mu.max(self.u0.eval(x).abs());
            md = md.max(self.u0.derivative(x).abs());
        }
        (mu, md)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    /// `sup |g|` over the constants-ledger window.
    pub flux_norm: f64,
    /// `false` when the flux is only piecewise linear.
    pub flux_smooth: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{:<5} {:<38} defect {:.3e}", if c.passed { "ok" } else { "FAIL" }, c.name, c.defect)?;
        }
        if !self.flux_smooth {
            writeln!(f, "note  flux is piecewise linear (continuous only)")?;
        }
        write!(f, "flux sup-norm on [0, {FLUX_NORM_WINDOW}]: {:.6e}", self.flux_norm)
    }
}

/// Check every hypothesis on the data; never fails, the report carries defects.
pub fn validate_problem(p: &PhysicalProblem) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name, defect: f64| checks.push(Check { name, passed: defect <= 0.0, defect: defect.max(0.0) });

    let finite = [p.d, p.beta, p.b].iter().all(|v| v.is_finite());
    push("finite parameters", if finite { 0.0 } else { f64::INFINITY });
    push("0<D<2", (-p.d).max(p.d - 2.0).max(if p.d == 0.0 || p.d == 2.0 { f64::MIN_POSITIVE } else { 0.0 }));
    push("beta>0", if p.beta > 0.0 { 0.0 } else { p.beta.abs().max(f64::MIN_POSITIVE) });
    push("b>0", if p.b > 0.0 { 0.0 } else { p.b.abs().max(f64::MIN_POSITIVE) });

    let mut below = 0.0f64;
    if p.b > 0.0 && p.b.is_finite() {
        let mut xs: Vec<f64> = (0..=2000).map(|k| p.b * k as f64 / 2000.0).collect();
        if let Profile::Tabulated(t) = &p.u0 {
            xs.extend(t.xs().iter().copied().filter(|x| (0.0..=p.b).contains(x)));
        }
        for x in xs {
            let u = p.u0.eval(x);
            below = below.max(if u.is_finite() { p.beta - u } else { f64::INFINITY });
        }
    }
    // Rounding in the profile formula is tolerated at the front level.
    push("u0>=beta on [0,b]", if below <= FRONT_LEVEL_TOL { 0.0 } else { below });
    let front = (p.u0.eval(p.b) - p.beta).abs();
    push("u0(b)=beta", if front <= FRONT_LEVEL_TOL { 0.0 } else { front });
    let compat = (p.d * p.u0.derivative(0.0) - p.flux.eval(0.0)).abs();
    push("D u0'(0)=g(0)", if compat <= COMPATIBILITY_TOL { 0.0 } else { compat });
    let flux_norm = p.flux.sup_norm(FLUX_NORM_WINDOW);
    push("flux finite on [0,1]", if flux_norm.is_finite() { 0.0 } else { f64::INFINITY });

    ValidationReport { checks, flux_norm, flux_smooth: p.flux.is_smooth() }
}

/// The map `i(x) = C1 + int_0^x 1/u0` and its inverse.
#[derive(Debug, Clone)]
pub struct StretchMap {
    pub c1: f64,
    pub c2: f64,
    grid: Vec<f64>,
    /// `int_0^{grid[k]} 1/u0`.
    cum: Vec<f64>,
    profile: Profile,
}

impl StretchMap {
    pub fn build(p: &PhysicalProblem, c1: f64) -> Result<Self> {
        let mut grid: Vec<f64> = p.u0.quadrature_grid(p.b).into_iter().filter(|&x| x > 0.0 && x < p.b).collect();
        grid.insert(0, 0.0);
        grid.push(p.b);
        let mut cum = vec![0.0; grid.len()];
        for k in 1..grid.len() {
            let (a, e) = (grid[k - 1], grid[k]);
            for &x in &[a, 0.5 * (a + e), e] {
                let u = p.u0.eval(x);
                if !(u > 0.0) {
                    return Err(Error::InvalidProfile(format!("u0({x}) = {u} is not positive")));
                }
            }
            cum[k] = cum[k - 1] + gauss8(a, e, |x| 1.0 / p.u0.eval(x));
        }
        if cum.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidProfile("stretch map is not strictly increasing".into()));
        }
        let c2 = c1 + cum[cum.len() - 1];
        Ok(Self { c1, c2, grid, cum, profile: p.u0.clone() })
    }

    /// `int_0^x 1/u0`, clamped to `[0, b]`.
    pub fn offset(&self, x: f64) -> f64 {
        let b = self.grid[self.grid.len() - 1];
        let x = x.clamp(0.0, b);
        let k = self.grid.partition_point(|&g| g <= x).saturating_sub(1).min(self.grid.len() - 2);
        self.cum[k] + gauss8(self.grid[k], x, |v| 1.0 / self.profile.eval(v))
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.c1 + self.offset(x)
    }

    /// `x` with `i(x) = C1 + offset`, by monotone bisection to 1e-12 in the offset.
    pub fn invert_offset(&self, offset: f64) -> f64 {
        let last = self.cum.len() - 1;
        if offset <= 0.0 {
            return 0.0;
        }
        if offset >= self.cum[last] {
            return self.grid[last];
        }
        let k = self.cum.partition_point(|&c| c <= offset).saturating_sub(1).min(last - 1);
        let (mut lo, mut hi) = (self.grid[k], self.grid[k + 1]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let val = self.cum[k] + gauss8(self.grid[k], mid, |v| 1.0 / self.profile.eval(v));
            if val < offset {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn invert(&self, y: f64) -> f64 {
        self.invert_offset(y - self.c1)
    }

    /// `int_0^b 1/u0`.
    pub fn length(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum C1Choice {
    /// A quarter of `int_0^b 1/u0`, so `C2 = 5 C1`.
    Auto,
    Fixed(f64),
}

/// Sup-norms entering the a-priori constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub u0: f64,
    pub du0: f64,
    pub g: f64,
}

/// Initial data on the heat-equation frame, sampled on a uniform grid of `[C1, C2]`.
#[derive(Debug, Clone)]
pub struct TransformedProblem {
    pub c1: f64,
    pub c2: f64,
    pub d: f64,
    pub beta: f64,
    /// `V0` samples at `C1 + k * step`.
    pub v0: Vec<f64>,
    /// Initial trace `F = V0 exp((1/D) int_y^{C2} V0)` at the same points.
    pub f: Vec<f64>,
    pub norms: Norms,
    /// Physical front position at the start of the segment.
    pub front0: f64,
}

pub const DEFAULT_TABLE_POINTS: usize = 257;

impl TransformedProblem {
    pub fn build(p: &PhysicalProblem, c1: C1Choice, points: usize) -> Result<Self> {
        if points < 5 {
            return Err(Error::InvalidInput("transformed tables need at least 5 points".into()));
        }
        let probe = StretchMap::build(p, 0.0)?;
        let len = probe.length();
        let c1 = match c1 {
            C1Choice::Auto => 0.25 * len,
            C1Choice::Fixed(v) => {
                if !(v > 0.0) || 3.0 * v >= v + len {
                    return Err(Error::Constraint(format!("need 0 < 3 C1 < C2, got C1 = {v}, C2 = {}", v + len)));
                }
                v
            }
        };
        let map = StretchMap { c1, c2: c1 + len, ..probe };
        let step = len / (points - 1) as f64;
        let mut v0 = Vec::with_capacity(points);
        let mut f = Vec::with_capacity(points);
        for k in 0..points {
            let off = k as f64 * step;
            let x = if k + 1 == points { p.b } else { map.invert_offset(off) };
            let v = p.u0.eval(x) - p.beta;
            // int_y^{C2} V0 dy = (b - x) - beta (C2 - y) exactly.
            let tail = (p.b - x) - p.beta * (len - off);
            v0.push(v);
            f.push(v * (tail / p.d).exp());
        }
        let (u0n, du0n) = p.profile_norms();
        let norms = Norms { u0: u0n, du0: du0n, g: p.flux.sup_norm(FLUX_NORM_WINDOW) };
        Ok(Self { c1, c2: map.c2, d: p.d, beta: p.beta, v0, f, norms, front0: p.b })
    }

    /// Data for a restarted segment from a trace `V0` sampled uniformly on `[C1, C2]`.
    pub fn from_trace(c1: f64, c2: f64, d: f64, beta: f64, v0: Vec<f64>, g_norm: f64, front0: f64) -> Result<Self> {
        if v0.len() < 5 || !(c2 > c1) {
            return Err(Error::InvalidInput("trace needs at least 5 samples on a non-empty interval".into()));
        }
        let n = v0.len();
        let step = (c2 - c1) / (n - 1) as f64;
        let cum = crate::quadrature::cumulative_uniform(&v0, step);
        let total = cum[n - 1];
        let f = v0.iter().zip(&cum).map(|(v, c)| v * ((total - c) / d).exp()).collect();
        let u0 = v0.iter().fold(0.0f64, |m, v| m.max((v + beta).abs()));
        let mut du0 = 0.0f64;
        for k in 0..n {
            let slope = if k == 0 {
                (-3.0 * v0[0] + 4.0 * v0[1] - v0[2]) / (2.0 * step)
            } else if k == n - 1 {
                (3.0 * v0[n - 1] - 4.0 * v0[n - 2] + v0[n - 3]) / (2.0 * step)
            } else {
                (v0[k + 1] - v0[k - 1]) / (2.0 * step)
            };
            // du/dx = (dV0/dy) / (V0 + beta).
            du0 = du0.max((slope / (v0[k] + beta)).abs());
        }
        Ok(Self { c1, c2, d, beta, v0, f, norms: Norms { u0, du0, g: g_norm }, front0 })
    }

    pub fn points(&self) -> usize {
        self.f.len()
    }

    pub fn step(&self) -> f64 {
        (self.c2 - self.c1) / (self.points() - 1) as f64
    }

    pub fn y(&self, k: usize) -> f64 {
        self.c1 + k as f64 * self.step()
    }

    fn interp(&self, vals: &[f64], y: f64) -> f64 {
        let n = vals.len();
        let s = (y - self.c1) / self.step();
        if s <= 0.0 {
            return vals[0];
        }
        if s >= (n - 1) as f64 {
            return vals[n - 1];
        }
        let k = (s.floor() as usize).min(n - 2);
        let w = s - k as f64;
        vals[k] + w * (vals[k + 1] - vals[k])
    }

    pub fn f_at(&self, y: f64) -> f64 {
        self.interp(&self.f, y)
    }

    pub fn v0_at(&self, y: f64) -> f64 {
        self.interp(&self.v0, y)
    }

    pub fn f_sup(&self) -> f64 {
        self.f.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `int_{C1}^{C2} (V0 + beta)`, the initial front position.
    pub fn front_from_trace(&self) -> f64 {
        let vals: Vec<f64> = self.v0.iter().map(|v| v + self.beta).collect();
        simpson_uniform(&vals, self.step())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_profile() -> PhysicalProblem {
        // u0 = 1 + x on [0, 1] with its own level and compatible flux.
        let t = Table::new((0..=400).map(|k| k as f64 / 400.0).collect(), (0..=400).map(|k| 1.0 + k as f64 / 400.0).collect()).unwrap();
        PhysicalProblem { d: 1.0, beta: 2.0, b: 1.0, flux: Flux::constant(1.0), u0: Profile::Tabulated(t) }
    }

    #[test]
    fn trivial_problem_validates() {
        let r = validate_problem(&PhysicalProblem::trivial(1.0, 1.0, 1.0));
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn large_diffusivity_fails_its_check() {
        let r = validate_problem(&PhysicalProblem::trivial(3.0, 1.0, 1.0));
        let names: Vec<_> = r.failures().map(|c| c.name).collect();
        assert_eq!(names, vec!["0<D<2"]);
    }

    #[test]
    fn incompatible_flux_fails() {
        let mut p = PhysicalProblem::trivial(1.0, 1.0, 1.0);
        p.flux = Flux::constant(0.5);
        let names: Vec<_> = validate_problem(&p).failures().map(|c| c.name).collect();
        assert_eq!(names, vec!["D u0'(0)=g(0)"]);
    }

    #[test]
    fn stretch_map_of_linear_profile_is_log() {
        let m = StretchMap::build(&linear_profile(), 0.0).unwrap();
        assert!((m.c2 - 2f64.ln()).abs() < 1e-12);
        for &x in &[0.1, 0.37, 0.9] {
            assert!((m.apply(x) - (1.0f64 + x).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn stretch_map_of_constant_profile() {
        let p = PhysicalProblem::trivial(1.0, 2.0, 3.0);
        let m = StretchMap::build(&p, 0.2).unwrap();
        assert!((m.c2 - (0.2 + 1.5)).abs() < 1e-14);
        assert!((m.apply(1.0) - 0.7).abs() < 1e-14);
    }

    #[test]
    fn auto_c1_is_a_fifth_of_c2_for_constant_data() {
        let tp = TransformedProblem::build(&PhysicalProblem::trivial(1.0, 2.0, 1.0), C1Choice::Auto, 65).unwrap();
        assert!((tp.c1 - 0.125).abs() < 1e-15);
        assert!((tp.c2 - 5.0 * tp.c1).abs() < 1e-14);
        assert!(tp.f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn explicit_c1_violating_margin_is_rejected() {
        let p = PhysicalProblem::trivial(1.0, 1.0, 1.0);
        assert!(matches!(TransformedProblem::build(&p, C1Choice::Fixed(0.5), 65), Err(Error::Constraint(_))));
    }

    #[test]
    fn trace_reproduces_front_position() {
        let p = PhysicalProblem { d: 0.8, beta: 1.0, b: 1.0, flux: Flux::constant(0.08), u0: Profile::quadratic(1.0, 1.0, 0.2, 0.1) };
        assert!(validate_problem(&p).passed());
        let tp = TransformedProblem::build(&p, C1Choice::Auto, 257).unwrap();
        assert!((tp.front_from_trace() - p.b).abs() < 1e-6 * p.b);
        assert!(tp.f[tp.points() - 1].abs() < 1e-12);
        for (v, f) in tp.v0.iter().zip(&tp.f) {
            assert_eq!(v.signum() == f.signum() || *v == 0.0, true);
        }
    }

    #[test]
    fn flux_integrals_match_closed_forms() {
        let g = Flux::new(FluxForm::Exponential { a: 0.5, c: -1.0 }).unwrap();
        assert!((g.integral(2.0) - 0.5 * (1.0 - (-2f64).exp())).abs() < 1e-15);
        let s = g.shifted(1.0);
        assert!((s.integral(1.0) - 0.5 * ((-1f64).exp() - (-2f64).exp())).abs() < 1e-15);
        assert_eq!(s.eval(0.0), g.eval(1.0));
    }
}
