//! Heat potentials of the initial trace and of the boundary densities.
//!
//! History integrals use piecewise-constant densities on each cell. Cells
//! within `near` steps of the evaluation time are integrated in closed form
//! along the straight chord of the source path; older cells use three-point
//! Gauss rules in `sqrt(t - tau)` along the parabola through the cell's
//! source positions. Field values at
//! nodes use densities linear on each cell instead, which needs the first
//! moments `int s K ds` of the same integrals.

use crate::kernels::{flux_integral, heat, heat_dr, heat_ds, mass_integral, mass_moment, Limit};
use crate::problem::{Flux, TransformedProblem};
use crate::quadrature::{abel_weight, TimeGrid};
use crate::special::{normal_mass, normal_pdf, normal_tail};

use super::paths::{w0_cell, Paths};

/// Gaussian window half-width in standard deviations.
const WINDOW: f64 = 9.0;

const GAUSS3: [(f64, f64); 3] = [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];

/// Kernel integrals of one source cell against one field point.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct Moments {
    /// Neumann function `N`.
    pub n: f64,
    /// `N_y`.
    pub ny: f64,
    /// `G_y` (equals `-N_xi`).
    pub gy: f64,
    /// `G_tau`.
    pub gtau: f64,
}

impl Moments {
    #[inline]
    fn add_scaled(&mut self, o: &Moments, c: f64) {
        self.n += c * o.n;
        self.ny += c * o.ny;
        self.gy += c * o.gy;
        self.gtau += c * o.gtau;
    }
}

/// A point on the heat frame, `base + off`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pos {
    pub base: f64,
    pub off: f64,
}

impl Pos {
    pub fn value(&self) -> f64 {
        self.base + self.off
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// Fixed face path `y0`.
    Face,
    /// Front path `y1`.
    Front,
}

/// Frozen snapshot of everything a potential evaluation reads.
pub struct Field<'a> {
    pub tp: &'a TransformedProblem,
    pub grid: TimeGrid,
    pub paths: &'a Paths,
    pub chi1: &'a [f64],
    pub chi2: &'a [f64],
    /// `g w0` on full cells.
    gw0_full: Vec<f64>,
    /// `g w0` on the half cells `[t_j, t_{j+1/2}]`.
    gw0_half: Vec<f64>,
    flux: Flux,
    w0: Vec<f64>,
    near: usize,
}

impl<'a> Field<'a> {
    pub fn new(
        tp: &'a TransformedProblem,
        flux: &Flux,
        grid: TimeGrid,
        paths: &'a Paths,
        chi1: &'a [f64],
        chi2: &'a [f64],
        w0: &[f64],
        near: usize,
    ) -> Self {
        let h = grid.h();
        let gw0_full = (0..grid.n).map(|j| flux.eval(grid.mid(j)) * w0_cell(w0, j, false)).collect();
        let gw0_half = (0..grid.n).map(|j| flux.eval(grid.node(j) + 0.25 * h) * w0_cell(w0, j, true)).collect();
        Self { tp, grid, paths, chi1, chi2, gw0_full, gw0_half, flux: flux.clone(), w0: w0.to_vec(), near }
    }

    /// `g w0` at time `t`, with `w0` linear between nodes.
    fn gw0_at(&self, t: f64) -> f64 {
        let h = self.grid.h();
        let j = ((t / h).floor() as usize).min(self.grid.n - 1);
        let a = t / h - j as f64;
        self.flux.eval(t) * ((1.0 - a) * self.w0[j] + a * self.w0[j + 1])
    }

    fn source(&self, src: Source) -> (f64, &[f64]) {
        match src {
            Source::Face => (self.paths.c1, &self.paths.d0),
            Source::Front => (self.paths.c2, &self.paths.d1),
        }
    }

    /// Closed-form kernel integrals over `s in [s1, s2]` (time before the field
    /// point) for a source on the chord through `off1` at `s1` with offset
    /// decreasing at rate `v` in `s`.
    fn span(&self, y: Pos, base: f64, off1: f64, v: f64, s1: f64, s2: f64, lim: Limit) -> Moments {
        let d = self.tp.d;
        let line = off1 + v * s1;
        let mut eps = (y.base - base) + (y.off - line);
        if lim == Limit::Positive && s1 == 0.0 {
            // The field point lies on the interior side of the chord that
            // reaches it; rounding may not. Older chords only extrapolate
            // there, so their sign carries geometry.
            eps = eps.max(0.0);
        }
        let epsi = (y.base + base) + (y.off + line);
        let md = mass_integral(eps, v, s1, s2, d);
        let mi = mass_integral(epsi, -v, s1, s2, d);
        let fd = -flux_integral(eps, v, s1, s2, d, lim);
        let fi = -flux_integral(epsi, -v, s1, s2, d, Limit::Principal);
        let g_at = |s: f64| heat(eps + v * s, s, d) - heat(epsi - v * s, s, d);
        Moments { n: md + mi, ny: fd + fi, gy: fd - fi, gtau: g_at(s1) - g_at(s2) + v * (fd + fi) }
    }

    /// As [`Field::span`], returning the integrals and their first moments in `s`.
    #[allow(clippy::too_many_arguments)]
    fn span_moments(&self, y: Pos, base: f64, off1: f64, v: f64, s1: f64, s2: f64, lim: Limit) -> (Moments, Moments) {
        let d = self.tp.d;
        let line = off1 + v * s1;
        let mut eps = (y.base - base) + (y.off - line);
        if lim == Limit::Positive && s1 == 0.0 {
            eps = eps.max(0.0);
        }
        let epsi = (y.base + base) + (y.off + line);
        let m0 = self.span(y, base, off1, v, s1, s2, lim);
        let md = mass_integral(eps, v, s1, s2, d);
        let mi = mass_integral(epsi, -v, s1, s2, d);
        let md1 = mass_moment(eps, v, s1, s2, d);
        let mi1 = mass_moment(epsi, -v, s1, s2, d);
        // The flux kernel is r / (2 D s) times the heat kernel, so its first
        // moment is a combination of mass integrals with no jump term.
        let fd1 = -(eps * md + v * md1) / (2.0 * d);
        let fi1 = -(epsi * mi - v * mi1) / (2.0 * d);
        let sg_at = |s: f64| if s <= 0.0 { 0.0 } else { s * (heat(eps + v * s, s, d) - heat(epsi - v * s, s, d)) };
        let m1 = Moments { n: md1 + mi1, ny: fd1 + fi1, gy: fd1 - fi1, gtau: sg_at(s1) - sg_at(s2) + (md - mi) + v * (fd1 + fi1) };
        (m0, m1)
    }

    /// Kernel integrals over the cell `[ka, kb]` (half-indices) for a field
    /// point at half-index `ke`.
    fn cell(&self, y: Pos, ke: usize, src: Source, ka: usize, kb: usize, lim: Limit) -> Moments {
        let d = self.tp.d;
        let (base, offs) = self.source(src);
        let s1 = self.grid.half(ke - kb);
        let s2 = self.grid.half(ke - ka);
        if ke - kb < 2 * self.near {
            let v = (offs[kb] - offs[ka]) / self.grid.half(kb - ka);
            self.span(y, base, offs[kb], v, s1, s2, lim)
        } else if kb - ka == 2 {
            // Gauss-Legendre in u = sqrt(s) absorbs the Abel weight; the
            // source follows the parabola through the three half-grid points.
            let (u1, u2) = (s1.sqrt(), s2.sqrt());
            let (uc, ur) = (0.5 * (u1 + u2), 0.5 * (u2 - u1));
            let mut m = Moments::default();
            for &(x, wq) in &GAUSS3 {
                let u = uc + ur * x;
                let sq = u * u;
                let th = (s2 - sq) / (s2 - s1);
                let off = 2.0 * (th - 0.5) * (th - 1.0) * offs[ka] - 4.0 * th * (th - 1.0) * offs[ka + 1] + 2.0 * th * (th - 0.5) * offs[kb];
                let rd = (y.base - base) + (y.off - off);
                let ri = (y.base + base) + (y.off + off);
                let w = 2.0 * u * wq * ur;
                let (kd, ki) = (heat_dr(rd, sq, d), heat_dr(ri, sq, d));
                m.n += (heat(rd, sq, d) + heat(ri, sq, d)) * w;
                m.ny += (kd + ki) * w;
                m.gy += (kd - ki) * w;
                m.gtau += (heat_ds(ri, sq, d) - heat_ds(rd, sq, d)) * w;
            }
            m
        } else {
            let km = (ka + kb) / 2;
            let sm = self.grid.half(ke - km);
            let rd = (y.base - base) + (y.off - offs[km]);
            let ri = (y.base + base) + (y.off + offs[km]);
            let w = abel_weight(s1, s2) * sm.sqrt();
            let (kd, ki) = (heat_dr(rd, sm, d), heat_dr(ri, sm, d));
            Moments {
                n: (heat(rd, sm, d) + heat(ri, sm, d)) * w,
                ny: (kd + ki) * w,
                gy: (kd - ki) * w,
                gtau: (heat_ds(ri, sm, d) - heat_ds(rd, sm, d)) * w,
            }
        }
    }

    /// Closed-form integrals and first moments over `[ka, kb]` along the
    /// straight chord between the source positions at its ends.
    fn chord_moments(&self, y: Pos, ke: usize, src: Source, ka: usize, kb: usize, lim: Limit) -> (Moments, Moments) {
        let (base, offs) = self.source(src);
        let v = (offs[kb] - offs[ka]) / self.grid.half(kb - ka);
        self.span_moments(y, base, offs[kb], v, self.grid.half(ke - kb), self.grid.half(ke - ka), lim)
    }

    /// As [`Field::cell`] over a whole cell, with the first moments in `s`.
    fn cell_moments(&self, y: Pos, ke: usize, src: Source, ka: usize, kb: usize, lim: Limit) -> (Moments, Moments) {
        let d = self.tp.d;
        let (base, offs) = self.source(src);
        let s1 = self.grid.half(ke - kb);
        let s2 = self.grid.half(ke - ka);
        if ke - kb < 2 * self.near {
            self.chord_moments(y, ke, src, ka, kb, lim)
        } else if kb - ka == 2 {
            let (u1, u2) = (s1.sqrt(), s2.sqrt());
            let (uc, ur) = (0.5 * (u1 + u2), 0.5 * (u2 - u1));
            let (mut m, mut m1) = (Moments::default(), Moments::default());
            for &(x, wq) in &GAUSS3 {
                let u = uc + ur * x;
                let sq = u * u;
                let th = (s2 - sq) / (s2 - s1);
                let off = 2.0 * (th - 0.5) * (th - 1.0) * offs[ka] - 4.0 * th * (th - 1.0) * offs[ka + 1] + 2.0 * th * (th - 0.5) * offs[kb];
                let rd = (y.base - base) + (y.off - off);
                let ri = (y.base + base) + (y.off + off);
                let w = 2.0 * u * wq * ur;
                let (kd, ki) = (heat_dr(rd, sq, d), heat_dr(ri, sq, d));
                let q = Moments {
                    n: heat(rd, sq, d) + heat(ri, sq, d),
                    ny: kd + ki,
                    gy: kd - ki,
                    gtau: heat_ds(ri, sq, d) - heat_ds(rd, sq, d),
                };
                m.add_scaled(&q, w);
                m1.add_scaled(&q, w * sq);
            }
            (m, m1)
        } else {
            let m = self.cell(y, ke, src, ka, kb, lim);
            let mut m1 = Moments::default();
            m1.add_scaled(&m, self.grid.half(ke - (ka + kb) / 2));
            (m, m1)
        }
    }

    /// Density-weighted history of one source path at half-index `ke`.
    ///
    /// Returns the moments weighted by the path density and, for the face,
    /// by `g w0`.
    pub fn history(&self, y: Pos, ke: usize, src: Source, lim: Limit) -> (Moments, Moments) {
        self.history_cells(y, ke, src, lim, ke / 2)
    }

    fn density(&self, src: Source) -> &[f64] {
        match src {
            Source::Face => self.chi2,
            Source::Front => self.chi1,
        }
    }

    /// As [`Field::history`] over the first `full` whole cells, plus the
    /// trailing half cell when `ke` is odd.
    fn history_cells(&self, y: Pos, ke: usize, src: Source, lim: Limit, full: usize) -> (Moments, Moments) {
        let dens = self.density(src);
        let (mut acc, mut accg) = (Moments::default(), Moments::default());
        for j in 0..full {
            let m = self.cell(y, ke, src, 2 * j, 2 * j + 2, lim);
            acc.add_scaled(&m, dens[j]);
            if src == Source::Face {
                accg.add_scaled(&m, self.gw0_full[j]);
            }
        }
        if ke % 2 == 1 {
            let j = full;
            let m = self.cell(y, ke, src, 2 * j, 2 * j + 1, lim);
            acc.add_scaled(&m, dens[j]);
            if src == Source::Face {
                accg.add_scaled(&m, self.gw0_half[j]);
            }
        }
        (acc, accg)
    }

    /// Slope in time of the density on cell `j`, centred where both
    /// neighbours exist.
    fn density_slope(&self, dens: &[f64], j: usize) -> f64 {
        let (n, h) = (self.grid.n, self.grid.h());
        match j {
            _ if n < 2 => 0.0,
            0 => (dens[1] - dens[0]) / h,
            _ if j + 1 == n => (dens[j] - dens[j - 1]) / h,
            _ => (dens[j + 1] - dens[j - 1]) / (2.0 * h),
        }
    }

    /// History over the first `full` whole cells at node time `t` with each
    /// density linear in time through its midpoint value. Piecewise-constant
    /// densities leave an error of one step in a layer of width
    /// `sqrt(D h)` beside each source path.
    fn history_linear(&self, y: Pos, ke: usize, src: Source, lim: Limit, full: usize) -> (Moments, Moments) {
        let dens = self.density(src);
        let h = self.grid.h();
        let t = self.grid.half(ke);
        let (mut acc, mut accg) = (Moments::default(), Moments::default());
        for j in 0..full {
            let (m0, m1) = self.cell_moments(y, ke, src, 2 * j, 2 * j + 2, lim);
            // rho(t - s) = rho_m + rho' (t - t_m) - rho' s.
            let lag = t - self.grid.mid(j);
            let slope = self.density_slope(dens, j);
            acc.add_scaled(&m0, dens[j] + slope * lag);
            acc.add_scaled(&m1, -slope);
            if src == Source::Face {
                let gs = (self.gw0_at(self.grid.node(j + 1)) - self.gw0_at(self.grid.node(j))) / h;
                accg.add_scaled(&m0, self.gw0_full[j] + gs * lag);
                accg.add_scaled(&m1, -gs);
            }
        }
        (acc, accg)
    }

    /// History at node `i`: every cell carries a density linear in time, and
    /// the last cell follows the source through its midpoint on two chords.
    /// The jump term next to the source then sees the density at the field
    /// time itself.
    fn history_node(&self, y: Pos, i: usize, src: Source, lim: Limit) -> (Moments, Moments) {
        let ke = 2 * i;
        let (mut acc, mut accg) = self.history_linear(y, ke, src, lim, i - 1);
        let dens = self.density(src);
        let h = self.grid.h();
        let j = i - 1;
        let lag = self.grid.node(i) - self.grid.mid(j);
        let slope = self.density_slope(dens, j);
        let gs = (self.gw0_at(self.grid.node(i)) - self.gw0_at(self.grid.node(j))) / h;
        for (ka, kb) in [(ke - 1, ke), (ke - 2, ke - 1)] {
            let (m0, m1) = self.chord_moments(y, ke, src, ka, kb, lim);
            acc.add_scaled(&m0, dens[j] + slope * lag);
            acc.add_scaled(&m1, -slope);
            if src == Source::Face {
                accg.add_scaled(&m0, self.gw0_full[j] + gs * lag);
                accg.add_scaled(&m1, -gs);
            }
        }
        (acc, accg)
    }

    /// `int N(y, t; xi, 0) F(xi) dxi` for the piecewise-linear trace.
    pub fn trace_potential(&self, y: Pos, t: f64) -> f64 {
        if t <= 0.0 {
            return self.tp.f_at(y.value());
        }
        let ss = (2.0 * self.tp.d * t).sqrt();
        let direct = self.gauss_sum(y.base - self.tp.c1, y.off, ss, false);
        let image = self.gauss_sum(-(y.base + self.tp.c1), -y.off, ss, false);
        direct.0 + image.0
    }

    /// `int N_y(y, t; xi, 0) F(xi) dxi`, via integration by parts against `G`.
    pub fn trace_flux(&self, y: Pos, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let tp = self.tp;
        let d = tp.d;
        let ss = (2.0 * d * t).sqrt();
        let yv = y.value();
        let g_at = |rel_lo: f64, xi: f64| heat(rel_lo, t, d) - heat(yv + xi, t, d);
        let last = tp.points() - 1;
        let ends = tp.f[0] * g_at((y.base - tp.c1) + y.off, tp.c1) - tp.f[last] * g_at((y.base - tp.c2) + y.off, tp.c2);
        let direct = self.gauss_sum(y.base - tp.c1, y.off, ss, true);
        let image = self.gauss_sum(-(y.base + tp.c1), -y.off, ss, true);
        ends + direct.1 - image.1
    }

    /// Sums over trace segments against a Gaussian of width `ss` centred at
    /// `C1 + rel + off`. Returns `(int k F, int k F')`.
    fn gauss_sum(&self, rel: f64, off: f64, ss: f64, slopes_only: bool) -> (f64, f64) {
        let tp = self.tp;
        let m = tp.points() - 1;
        let step = tp.step();
        let centre = rel + off;
        let lo = ((centre - WINDOW * ss) / step).floor();
        let hi = ((centre + WINDOW * ss) / step).ceil();
        if hi < 0.0 || lo > m as f64 {
            return (0.0, 0.0);
        }
        let klo = lo.max(0.0) as usize;
        let khi = (hi.min(m as f64) as usize).max(klo);
        let a_at = |k: usize| ((k as f64 * step - rel) - off) / ss;
        let (mut val, mut der) = (0.0, 0.0);
        let mut a0 = a_at(klo);
        let mut t0 = normal_tail(a0);
        let mut p0 = if slopes_only { 0.0 } else { normal_pdf(a0) };
        for k in klo..khi {
            let a1 = a_at(k + 1);
            let t1 = normal_tail(a1);
            let p1 = if slopes_only { 0.0 } else { normal_pdf(a1) };
            let mass = normal_mass(a0, t0, a1, t1);
            let q = (tp.f[k + 1] - tp.f[k]) / step;
            der += q * mass;
            if !slopes_only {
                val += (tp.f[k] - q * a0 * ss) * mass + q * ss * (p0 - p1);
            }
            a0 = a1;
            t0 = t1;
            p0 = p1;
        }
        (val, der)
    }

    /// `w(y, t)` at node `i`, with the interior one-sided limit on the face.
    pub fn field_at(&self, y: Pos, i: usize) -> f64 {
        let t = self.grid.node(i);
        if i == 0 {
            return self.tp.f_at(y.value());
        }
        let d = self.tp.d;
        let beta = self.tp.beta;
        let (m1, _) = self.history_node(y, i, Source::Front, Limit::Principal);
        let (m0, mg) = self.history_node(y, i, Source::Face, Limit::Positive);
        self.trace_potential(y, t) + d * m1.n - d * m0.gy + beta * (m0.n - mg.n)
    }

    /// Bracketed terms of both density equations at midpoint `i`, before the jump factor.
    pub fn psi_terms(&self, i: usize) -> (f64, f64) {
        let ke = 2 * i + 1;
        let t = self.grid.mid(i);
        let d = self.tp.d;
        let beta = self.tp.beta;
        let front = Pos { base: self.paths.c2, off: self.paths.d1[ke] };
        let face = Pos { base: self.paths.c1, off: self.paths.d0[ke] };

        let (m1, _) = self.history(front, ke, Source::Front, Limit::Principal);
        let (m0, mg) = self.history(front, ke, Source::Face, Limit::Principal);
        let p1 = self.trace_flux(front, t) + d * m1.ny + m0.gtau + beta * (m0.ny - mg.ny);

        let (m1, _) = self.history(face, ke, Source::Front, Limit::Principal);
        let (m0, mg) = self.history(face, ke, Source::Face, Limit::Principal);
        let p2 = self.trace_potential(face, t) + d * m1.n - d * m0.gy + beta * (m0.n - mg.n);
        (p1, p2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{C1Choice, Flux, PhysicalProblem, Profile, TransformedProblem};
    use crate::volterra::paths::{free_boundaries, BoundaryData};

    fn setup() -> (TransformedProblem, TimeGrid, Paths) {
        let p = PhysicalProblem { d: 0.9, beta: 1.0, b: 1.0, flux: Flux::constant(0.09), u0: Profile::quadratic(1.0, 1.0, 0.3, 0.1) };
        let tp = TransformedProblem::build(&p, C1Choice::Auto, 257).unwrap();
        let grid = TimeGrid::new(0.1, 32).unwrap();
        let bd = BoundaryData { c1: tp.c1, c2: tp.c2, d: tp.d, beta: tp.beta };
        let chi1: Vec<f64> = (0..32).map(|j| -0.3 - 0.1 * grid.mid(j)).collect();
        let chi2: Vec<f64> = (0..32).map(|j| 0.2 + grid.mid(j)).collect();
        let paths = free_boundaries(&chi1, &chi2, &[1.1; 33], &p.flux, &grid, bd).unwrap();
        (tp, grid, paths)
    }

    #[test]
    fn trace_potential_matches_direct_quadrature() {
        let (tp, grid, paths) = setup();
        let z = vec![0.0; 32];
        let f = Field::new(&tp, &Flux::zero(), grid, &paths, &z, &z, &[1.0; 33], 4);
        let (y, t) = (0.6, 0.03);
        let num: f64 = {
            let n = 20000;
            let h = (tp.c2 - tp.c1) / n as f64;
            (0..n)
                .map(|k| {
                    let xi = tp.c1 + (k as f64 + 0.5) * h;
                    (heat(y - xi, t, tp.d) + heat(y + xi, t, tp.d)) * tp.f_at(xi) * h
                })
                .sum()
        };
        let exact = f.trace_potential(Pos { base: y, off: 0.0 }, t);
        assert!((exact - num).abs() < 1e-7, "{exact} {num}");
    }

    #[test]
    fn trace_flux_is_derivative_of_potential() {
        let (tp, grid, paths) = setup();
        let z = vec![0.0; 32];
        let f = Field::new(&tp, &Flux::zero(), grid, &paths, &z, &z, &[1.0; 33], 4);
        let (y, t, e) = (0.9, 0.02, 1e-5);
        let fd = (f.trace_potential(Pos { base: y + e, off: 0.0 }, t) - f.trace_potential(Pos { base: y - e, off: 0.0 }, t)) / (2.0 * e);
        let an = f.trace_flux(Pos { base: y, off: 0.0 }, t);
        assert!((fd - an).abs() < 1e-6 * (1.0 + an.abs()), "{fd} {an}");
    }

    #[test]
    fn span_first_moments_match_quadrature() {
        let (tp, grid, paths) = setup();
        let z = vec![0.0; 32];
        let f = Field::new(&tp, &Flux::zero(), grid, &paths, &z, &z, &[1.0; 33], 4);
        let d = tp.d;
        let base = paths.c1;
        for &(yoff, off1, v, s1, s2) in &[(0.05, 0.01, 0.4, 0.0, 0.01), (0.3, -0.02, -1.5, 0.002, 0.02), (0.0, 0.0, 0.1, 1e-4, 5e-3)] {
            let y = Pos { base, off: yoff };
            let (_, m1) = f.span_moments(y, base, off1, v, s1, s2, Limit::Principal);
            let mut q = Moments::default();
            let panels = 4000;
            let (u1, u2) = (f64::sqrt(s1), f64::sqrt(s2));
            let du = (u2 - u1) / panels as f64;
            for k in 0..panels {
                for &(x, wq) in &GAUSS3 {
                    let u = u1 + (k as f64 + 0.5 + 0.5 * x) * du;
                    let s = u * u;
                    let line = off1 + v * s1;
                    let off = line - v * s;
                    let rd = (y.base - base) + (y.off - off);
                    let ri = (y.base + base) + (y.off + off);
                    let w = 2.0 * u * 0.5 * wq * du * s;
                    let (kd, ki) = (heat_dr(rd, s, d), heat_dr(ri, s, d));
                    q.add_scaled(&Moments { n: heat(rd, s, d) + heat(ri, s, d), ny: kd + ki, gy: kd - ki, gtau: heat_ds(ri, s, d) - heat_ds(rd, s, d) }, w);
                }
            }
            for (a, b) in [(m1.n, q.n), (m1.ny, q.ny), (m1.gy, q.gy), (m1.gtau, q.gtau)] {
                assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "{m1:?} vs {q:?}");
            }
        }
    }

    #[test]
    fn far_rule_agrees_with_closed_form_on_old_cells() {
        let (tp, grid, paths) = setup();
        let z = vec![0.0; 32];
        let exact = Field::new(&tp, &Flux::zero(), grid, &paths, &z, &z, &[1.0; 33], 1000);
        let mid = Field::new(&tp, &Flux::zero(), grid, &paths, &z, &z, &[1.0; 33], 1);
        let y = Pos { base: paths.c2, off: paths.d1[64] };
        for src in [Source::Face, Source::Front] {
            let a = exact.cell(y, 64, src, 10, 12, Limit::Principal);
            let b = mid.cell(y, 64, src, 10, 12, Limit::Principal);
            for (u, v) in [(a.n, b.n), (a.ny, b.ny), (a.gy, b.gy), (a.gtau, b.gtau)] {
                assert!((u - v).abs() < 2e-3 * (u.abs() + 1e-3), "{src:?}: {a:?} vs {b:?}");
            }
        }
    }
}
