//! Independent front-fixing finite-difference solver for the physical
//! problem, used only to cross-check the integral-equation pipeline.
//!
//! With `xi = x / s(t)` the domain is `[0, 1]` and
//! `u_t = u^2 (D u_xixi / s^2 - u_xi / s) + xi (s'/s) u_xi`.
//! Explicit Euler in time, central differences in space, a ghost node for the
//! flux at `xi = 0`, and `u = beta` pinned at the front.

use crate::error::{Error, Result};
use crate::physical::PhysicalSolution;
use crate::problem::PhysicalProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontFixGrid {
    pub nx: usize,
    /// Fraction of the explicit stability limit used per step.
    pub safety: f64,
}

impl Default for FrontFixGrid {
    fn default() -> Self {
        Self { nx: 200, safety: 0.4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutput {
    pub times: Vec<f64>,
    pub s: Vec<f64>,
    /// Profiles on `xi = j / nx` at each output time.
    pub u: Vec<Vec<f64>>,
    pub steps: usize,
    /// Largest `beta - u` seen over all steps.
    pub min_principle_defect: f64,
    /// `int_0^t D u_x(s, tau) dtau` at each output time.
    pub front_flux_integral: Vec<f64>,
}

impl OracleOutput {
    pub fn front_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&v| v <= t).clamp(1, self.times.len() - 1);
        let w = ((t - self.times[k - 1]) / (self.times[k] - self.times[k - 1])).clamp(0.0, 1.0);
        self.s[k - 1] + w * (self.s[k] - self.s[k - 1])
    }

    /// `u(x, t_k)` by linear interpolation on the mapped grid.
    pub fn u_at(&self, k: usize, x: f64) -> f64 {
        let nx = self.u[k].len() - 1;
        let xi = (x / self.s[k]).clamp(0.0, 1.0) * nx as f64;
        let j = (xi.floor() as usize).min(nx - 1);
        let w = xi - j as f64;
        self.u[k][j] + w * (self.u[k][j + 1] - self.u[k][j])
    }
}

/// Integrate to each of `times` (non-decreasing, starting at or after 0).
pub fn solve_frontfix(p: &PhysicalProblem, grid: FrontFixGrid, times: &[f64]) -> Result<OracleOutput> {
    if grid.nx < 16 {
        return Err(Error::InvalidInput(format!("front-fixing grid needs at least 16 cells, got {}", grid.nx)));
    }
    if !(grid.safety > 0.0 && grid.safety <= 1.0) {
        return Err(Error::InvalidInput(format!("safety factor must lie in (0, 1], got {}", grid.safety)));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidInput("output times must be non-negative and sorted".into()));
    }
    let (d, beta) = (p.d, p.beta);
    let nx = grid.nx;
    let dxi = 1.0 / nx as f64;
    let mut u: Vec<f64> = (0..=nx).map(|j| p.u0.eval(p.b * j as f64 * dxi)).collect();
    u[nx] = beta;
    let mut s = p.b;
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut defect = 0.0f64;
    let mut flux_int = 0.0;
    let mut out = OracleOutput { times: Vec::new(), s: Vec::new(), u: Vec::new(), steps: 0, min_principle_defect: 0.0, front_flux_integral: Vec::new() };
    let mut next = vec![0.0; nx + 1];

    for &target in times {
        while t < target {
            let front_slope = (3.0 * u[nx] - 4.0 * u[nx - 1] + u[nx - 2]) / (2.0 * dxi);
            let front_flux = d / s * front_slope;
            let sdot = beta - front_flux;
            let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut dt = grid.safety * dxi * dxi * s * s / (d * umax * umax);
            let last = target - t <= dt;
            if last {
                dt = target - t;
            }
            let g = p.flux.eval(t);
            for j in 0..nx {
                let left = if j == 0 { u[1] - 2.0 * dxi * s * g / d } else { u[j - 1] };
                let u_xi = (u[j + 1] - left) / (2.0 * dxi);
                let u_xixi = (u[j + 1] - 2.0 * u[j] + left) / (dxi * dxi);
                let xi = j as f64 * dxi;
                let rate = u[j] * u[j] * (d * u_xixi / (s * s) - u_xi / s) + xi * sdot / s * u_xi;
                next[j] = u[j] + dt * rate;
            }
            next[nx] = beta;
            std::mem::swap(&mut u, &mut next);
            s += dt * sdot;
            flux_int += dt * front_flux;
            t = if last { target } else { t + dt };
            steps += 1;
            if !(s > 0.0) || u.iter().any(|v| !v.is_finite()) {
                return Err(Error::BlowUp { t, reason: format!("front {s}, non-finite profile or collapsed domain") });
            }
            defect = defect.max(u.iter().fold(f64::MIN, |m, v| m.max(beta - v)));
        }
        out.times.push(target);
        out.s.push(s);
        out.u.push(u.clone());
        out.front_flux_integral.push(flux_int);
    }
    out.steps = steps;
    out.min_principle_defect = defect;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub times: Vec<f64>,
    pub s_integral: Vec<f64>,
    pub s_oracle: Vec<f64>,
    pub s_sup: f64,
    pub s_l2: f64,
    /// `s_sup` relative to the largest front position.
    pub s_rel_sup: f64,
    /// Per compared time: sup over common `x` of `|u_A - u_B|`.
    pub u_linf: Vec<f64>,
}

impl ComparisonReport {
    pub fn u_linf_sup(&self) -> f64 {
        self.u_linf.iter().fold(0.0, |m, v| m.max(*v))
    }
}

/// Compare fronts and profiles at the oracle's output times.
pub fn compare(sol: &PhysicalSolution, oracle: &OracleOutput) -> Result<ComparisonReport> {
    let ta = sol.times();
    let (lo, hi) = (ta[0], ta[ta.len() - 1]);
    let keep: Vec<usize> = (0..oracle.times.len()).filter(|&k| oracle.times[k] >= lo - 1e-14 && oracle.times[k] <= hi + 1e-14).collect();
    if keep.is_empty() {
        return Err(Error::InvalidInput("time ranges do not overlap".into()));
    }
    let mut rep = ComparisonReport { times: Vec::new(), s_integral: Vec::new(), s_oracle: Vec::new(), s_sup: 0.0, s_l2: 0.0, s_rel_sup: 0.0, u_linf: Vec::new() };
    let mut smax = 0.0f64;
    for &k in &keep {
        let t = oracle.times[k];
        let sa = sol.front_at(t);
        let sb = oracle.s[k];
        rep.times.push(t);
        rep.s_integral.push(sa);
        rep.s_oracle.push(sb);
        let e = (sa - sb).abs();
        rep.s_sup = rep.s_sup.max(e);
        rep.s_l2 += e * e;
        smax = smax.max(sb.abs()).max(sa.abs());
        // Profile comparison on the slice nearest in time.
        let i = ta.partition_point(|&v| v < t - 1e-12).min(ta.len() - 1);
        let sl = &sol.slices[i];
        let xmax = sl.front().min(sb);
        let mut worst = 0.0f64;
        for q in 0..=100 {
            let x = xmax * q as f64 / 100.0;
            worst = worst.max((sl.u_at(x) - oracle.u_at(k, x)).abs());
        }
        rep.u_linf.push(worst);
    }
    rep.s_l2 = (rep.s_l2 / keep.len() as f64).sqrt();
    rep.s_rel_sup = if smax > 0.0 { rep.s_sup / smax } else { 0.0 };
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_state_is_stationary_in_profile() {
        let p = PhysicalProblem::trivial(1.0, 1.0, 1.0);
        let times: Vec<f64> = (0..=4).map(|k| 0.05 * k as f64).collect();
        let o = solve_frontfix(&p, FrontFixGrid { nx: 32, safety: 0.4 }, &times).unwrap();
        for (k, t) in times.iter().enumerate() {
            assert!((o.s[k] - (1.0 + t)).abs() < 1e-12);
            assert!(o.u[k].iter().all(|&v| (v - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn rejects_coarse_grid() {
        let p = PhysicalProblem::trivial(1.0, 1.0, 1.0);
        assert!(solve_frontfix(&p, FrontFixGrid { nx: 8, safety: 0.4 }, &[0.1]).is_err());
    }
}
