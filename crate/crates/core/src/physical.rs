//! Parametric inversion from the heat frame back to `(x, u)` slices and the
//! residual diagnostics of the original free-boundary problem.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::cumulative_uniform;
use crate::volterra::{DensityState, Pos, Solver};

/// One time slice of the physical solution, sampled on a uniform `y` slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub t: f64,
    /// Front position from the boundary path, exact given the densities.
    pub front: f64,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl Slice {
    pub fn front(&self) -> f64 {
        self.front
    }

    /// Front position from integrating `u` across the slice.
    pub fn x_end(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Linear interpolation of `u` at physical position `x`.
    pub fn u_at(&self, x: f64) -> f64 {
        let k = self.x.partition_point(|&v| v <= x).clamp(1, self.x.len() - 1);
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        let w = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        self.u[k - 1] + w * (self.u[k] - self.u[k - 1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalSolution {
    pub slices: Vec<Slice>,
}

impl PhysicalSolution {
    pub fn times(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.t).collect()
    }

    pub fn fronts(&self) -> Vec<f64> {
        self.slices.iter().map(Slice::front).collect()
    }

    /// Front position at arbitrary `t` by linear interpolation in time.
    pub fn front_at(&self, t: f64) -> f64 {
        let ts = self.times();
        let k = ts.partition_point(|&v| v <= t).clamp(1, ts.len() - 1);
        let w = ((t - ts[k - 1]) / (ts[k] - ts[k - 1])).clamp(0.0, 1.0);
        let (a, b) = (self.slices[k - 1].front(), self.slices[k].front());
        a + w * (b - a)
    }
}

/// Invert the state at node `i` on a slice of `ny` points.
///
/// `V = w / (C + (1/D) int_y^{y1} w)`, `u = V + beta`, `x = int_{y0}^y u`.
pub fn invert_state(solver: &Solver, state: &DensityState, i: usize, ny: usize) -> Result<Slice> {
    if ny < 5 {
        return Err(Error::InvalidInput("inversion slice needs at least 5 points".into()));
    }
    let field = solver.field(state);
    let mut w = solver.slice(&field, &state.paths, i, ny);
    // w vanishes on the front; the sampled value there is a smooth
    // discretization error. Removing it with a quadratic blend keeps the face
    // value and slope and leaves no kink beside the front.
    let miss = w[ny - 1];
    for (k, wk) in w.iter_mut().enumerate() {
        let theta = k as f64 / (ny - 1) as f64;
        *wk -= miss * theta * theta;
    }
    w[ny - 1] = 0.0;
    let t = solver.grid.node(i);
    let mut sl = invert_samples(solver.tp.d, solver.tp.beta, state.c_node(i), state.y0_node(i), state.y1_node(i), t, w)?;
    sl.front = exact_front(solver, state, i);
    Ok(sl)
}

/// `s(t) = s(0) + (beta / (1 + beta)) (y1(t) - C2 + 2 beta t)`.
///
/// Along the front the reciprocal variable moves at `(1 + beta) s' / beta`,
/// so the front follows the stored displacement of `y1` without cancellation.
pub fn exact_front(solver: &Solver, state: &DensityState, i: usize) -> f64 {
    let beta = solver.tp.beta;
    solver.tp.front0 + beta / (1.0 + beta) * (state.paths.d1[2 * i] + 2.0 * beta * solver.grid.node(i))
}

/// `s'(t)` at node `i` from the half-grid displacements, second order.
pub fn front_speed(solver: &Solver, state: &DensityState, i: usize) -> f64 {
    let beta = solver.tp.beta;
    let d1 = &state.paths.d1;
    let hh = 0.5 * solver.grid.h();
    let k = 2 * i;
    let last = d1.len() - 1;
    let dd = if k == 0 {
        (-3.0 * d1[0] + 4.0 * d1[1] - d1[2]) / (2.0 * hh)
    } else if k == last {
        (3.0 * d1[k] - 4.0 * d1[k - 1] + d1[k - 2]) / (2.0 * hh)
    } else {
        (d1[k + 1] - d1[k - 1]) / (2.0 * hh)
    };
    beta / (1.0 + beta) * (dd + 2.0 * beta)
}

/// Inversion of one slice given its samples of `w`.
pub fn invert_samples(d: f64, beta: f64, c: f64, y0: f64, y1: f64, t: f64, w: Vec<f64>) -> Result<Slice> {
    let ny = w.len();
    let dy = (y1 - y0) / (ny - 1) as f64;
    let mut rev = w.clone();
    rev.reverse();
    let mut tail = cumulative_uniform(&rev, dy);
    tail.reverse();
    let mut v = Vec::with_capacity(ny);
    for (wk, tk) in w.iter().zip(&tail) {
        let den = c + tk / d;
        if !(den > 0.0) {
            return Err(Error::InversionSingularity { t, value: den });
        }
        v.push(wk / den + beta);
    }
    let x = cumulative_uniform(&v, dy);
    let y = (0..ny).map(|k| y0 + k as f64 * dy).collect();
    let front = x[ny - 1];
    Ok(Slice { t, front, y, w, x, u: v })
}

/// Invert every node of the state.
pub fn invert_all(solver: &Solver, state: &DensityState, ny: usize) -> Result<PhysicalSolution> {
    let slices = (0..=solver.grid.n).into_par_iter().map(|i| invert_state(solver, state, i, ny)).collect::<Result<Vec<_>>>()?;
    Ok(PhysicalSolution { slices })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResidualReport {
    /// Per node: `|D u_x(0,t) - g(t)|`.
    pub neumann: Vec<f64>,
    /// Per node: `|u(s,t) - beta|`.
    pub dirichlet: Vec<f64>,
    /// Per node: `|D u_x(s,t) - u(s,t) + s'(t)|`.
    pub stefan: Vec<f64>,
    /// Per node: sup over interior slice points of `|u_t - u^2 (D u_xx - u_x)|`.
    /// `None` when the time step is too small for differences to beat rounding.
    pub pde: Option<Vec<f64>>,
    /// Per node: the same sup over the interior band `INTERIOR_BAND` of the
    /// slice, zero before `INTERIOR_ONSET` of the horizon. Generic data are
    /// incompatible at the corners, so layers at the start and near the face
    /// converge slowly; this band converges at the scheme's order.
    pub pde_interior: Option<Vec<f64>>,
    /// Per node: `|x(y1) - s|`, the quadrature error of the inversion.
    pub front_consistency: Vec<f64>,
    /// Per node: heat-frame face condition with `-w^2 / w0`.
    pub face_flux: Vec<f64>,
    /// Per node: the same condition with `+(1/D) w^2 / w0`.
    pub face_flux_alt: Vec<f64>,
    /// Per node: `|w(y1(t), t)|` before it is zeroed for inversion.
    pub front_trace: Vec<f64>,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl ResidualReport {
    pub fn sup_neumann(&self) -> f64 {
        sup(&self.neumann)
    }
    pub fn sup_dirichlet(&self) -> f64 {
        sup(&self.dirichlet)
    }
    pub fn sup_stefan(&self) -> f64 {
        sup(&self.stefan)
    }
    pub fn sup_pde(&self) -> Option<f64> {
        self.pde.as_deref().map(sup)
    }
    pub fn sup_pde_interior(&self) -> Option<f64> {
        self.pde_interior.as_deref().map(sup)
    }
    pub fn sup_front_consistency(&self) -> f64 {
        sup(&self.front_consistency)
    }
    pub fn sup_face_flux(&self) -> f64 {
        sup(&self.face_flux)
    }
    pub fn sup_face_flux_alt(&self) -> f64 {
        sup(&self.face_flux_alt)
    }
    pub fn sup_front_trace(&self) -> f64 {
        sup(&self.front_trace)
    }
}

/// First derivative on a uniform grid, second order including the ends.
fn diff1(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|k| {
            if k == 0 {
                (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
            } else if k == n - 1 {
                (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
            } else {
                (f[k + 1] - f[k - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Second derivative on a uniform grid, second order including the ends.
fn diff2(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let h2 = h * h;
    (0..n)
        .map(|k| {
            if k == 0 {
                (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2
            } else if k == n - 1 {
                (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2
            } else {
                (f[k + 1] - 2.0 * f[k] + f[k - 1]) / h2
            }
        })
        .collect()
}

/// Relative rounding noise above which time differences are not reported.
const TIME_NOISE: f64 = 1e-6;

/// Slice coordinates `y/y1` spanned by the interior PDE residual.
pub const INTERIOR_BAND: (f64, f64) = (0.125, 0.875);

/// Fraction of the horizon after which the interior PDE residual is taken.
pub const INTERIOR_ONSET: f64 = 0.25;

/// Residuals of the original problem on the inverted lattice.
pub fn residual_report(sol: &PhysicalSolution, solver: &Solver, state: &DensityState) -> Result<ResidualReport> {
    let nt = sol.slices.len();
    if nt < 3 || nt != solver.grid.n + 1 {
        return Err(Error::InsufficientData(format!("need one slice per node and at least 3, got {nt}")));
    }
    let ny = sol.slices[0].u.len();
    if ny < 5 || sol.slices.iter().any(|s| s.u.len() != ny) {
        return Err(Error::InsufficientData("slices need equal length of at least 5".into()));
    }
    let (d, beta) = (solver.tp.d, solver.tp.beta);
    let dth = 1.0 / (ny - 1) as f64;
    let dt = solver.grid.h();
    let scale = sol.slices.iter().flat_map(|s| s.u.iter().chain(&s.x)).fold(0.0f64, |m, v| m.max(v.abs()));
    let resolved = 64.0 * f64::EPSILON * scale / dt < TIME_NOISE;

    let mut rep = ResidualReport::default();
    let mut pde = Vec::with_capacity(nt);
    let mut pde_interior = Vec::with_capacity(nt);
    let band = |j: usize| {
        let th = j as f64 * dth;
        th >= INTERIOR_BAND.0 - 1e-12 && th <= INTERIOR_BAND.1 + 1e-12
    };
    let field = solver.field(state);
    for (i, sl) in sol.slices.iter().enumerate() {
        let t = sl.t;
        let g = solver.flux.eval(t);
        let u_th = diff1(&sl.u, dth);
        let x_th = diff1(&sl.x, dth);
        let ux: Vec<f64> = u_th.iter().zip(&x_th).map(|(a, b)| a / b).collect();
        rep.neumann.push((d * ux[0] - g).abs());
        rep.dirichlet.push((sl.u[ny - 1] - beta).abs());
        rep.stefan.push((d * ux[ny - 1] - sl.u[ny - 1] + front_speed(solver, state, i)).abs());
        rep.front_consistency.push((sl.x_end() - sl.front()).abs());

        // Face condition D w_y = g w + beta g w0 -+ w^2 / w0 on the heat frame.
        let dy = (sl.y[ny - 1] - sl.y[0]) / (ny - 1) as f64;
        let wy = (-3.0 * sl.w[0] + 4.0 * sl.w[1] - sl.w[2]) / (2.0 * dy);
        let w0 = state.w0[i];
        let base = g * sl.w[0] + beta * g * w0;
        let sq = sl.w[0] * sl.w[0] / w0;
        rep.face_flux.push((d * wy - (base - sq)).abs());
        rep.face_flux_alt.push((d * wy - (base + sq / d)).abs());
        let front = Pos { base: state.paths.c2, off: state.paths.d1[2 * i] };
        rep.front_trace.push(field.field_at(front, i).abs());

        if !resolved || i == 0 || i + 1 == nt {
            pde.push(0.0);
            pde_interior.push(0.0);
            continue;
        }
        let (prev, next) = (&sol.slices[i - 1], &sol.slices[i + 1]);
        let u_thth = diff2(&sl.u, dth);
        let x_thth = diff2(&sl.x, dth);
        let late = solver.grid.node(i) >= INTERIOR_ONSET * solver.grid.sigma * (1.0 - 1e-12);
        let (mut worst, mut inner) = (0.0f64, 0.0f64);
        for j in 1..ny - 1 {
            let u_t = (next.u[j] - prev.u[j]) / (2.0 * dt);
            let x_t = (next.x[j] - prev.x[j]) / (2.0 * dt);
            let uxx = (u_thth[j] - ux[j] * x_thth[j]) / (x_th[j] * x_th[j]);
            let ut_x = u_t - ux[j] * x_t;
            let u = sl.u[j];
            let r = (ut_x - u * u * (d * uxx - ux[j])).abs();
            worst = worst.max(r);
            if late && band(j) {
                inner = inner.max(r);
            }
        }
        pde.push(worst);
        pde_interior.push(inner);
    }
    rep.pde = resolved.then_some(pde);
    rep.pde_interior = resolved.then_some(pde_interior);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trace_inverts_to_constant_state() {
        let s = invert_samples(1.0, 2.0, 1.0, 0.25, 1.25, 0.0, vec![0.0; 9]).unwrap();
        assert!(s.u.iter().all(|&u| u == 2.0));
        assert!((s.front() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn inversion_recovers_hopf_cole_profile() {
        // w = V exp((1/D) int_y^{y1} V) for V = a (y1 - y) gives back V.
        let (d, a, y0, y1) = (0.7, 0.3, 0.2, 1.2);
        let n = 129;
        let dy = (y1 - y0) / (n - 1) as f64;
        let w: Vec<f64> = (0..n)
            .map(|k| {
                let y = y0 + k as f64 * dy;
                let v = a * (y1 - y);
                v * (a * (y1 - y).powi(2) / (2.0 * d)).exp()
            })
            .collect();
        let s = invert_samples(d, 1.0, 1.0, y0, y1, 0.0, w).unwrap();
        for (k, u) in s.u.iter().enumerate() {
            let y = y0 + k as f64 * dy;
            assert!((u - 1.0 - a * (y1 - y)).abs() < 1e-8);
        }
    }

    #[test]
    fn nonpositive_denominator_is_reported() {
        let r = invert_samples(1.0, 1.0, -1.0, 0.0, 1.0, 0.5, vec![0.0; 9]);
        assert!(matches!(r, Err(Error::InversionSingularity { .. })));
    }
}
