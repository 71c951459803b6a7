use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::{Flux, TransformedProblem};
use crate::quadrature::{simpson_uniform, TimeGrid};

use super::constants::ConstantsLedger;
use super::paths::{free_boundaries, BoundaryData, Paths};
use super::potential::{Field, Pos};

/// Coefficient multiplying the bracketed terms of both density equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpRule {
    /// Factor 2 from the half-density jump of the layer potentials.
    Exact,
    /// Factor `2 / (2 - D)`; agrees with `Exact` only at `D = 1`.
    Scaled,
}

impl JumpRule {
    pub fn factor(self, d: f64) -> f64 {
        match self {
            JumpRule::Exact => 2.0,
            JumpRule::Scaled => 2.0 / (2.0 - d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub inner_tol: f64,
    pub inner_max: usize,
    pub outer_tol: f64,
    pub outer_max: usize,
    /// Relaxation weight of the outer update.
    pub relax: f64,
    /// Points of the space slice used for `w0` updates and inversion.
    pub slice_points: usize,
    pub jump: JumpRule,
    /// History cells integrated in closed form.
    pub near_cells: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            inner_tol: 1e-10,
            inner_max: 200,
            outer_tol: 1e-8,
            outer_max: 50,
            relax: 1.0,
            slice_points: 65,
            jump: JumpRule::Exact,
            near_cells: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    pub grid: TimeGrid,
    /// `chi1 = w_y(y1(t), t)` at midpoints.
    pub chi1: Vec<f64>,
    /// `chi2 = w(y0(t), t)` at midpoints.
    pub chi2: Vec<f64>,
    /// Outer unknown at nodes.
    pub w0: Vec<f64>,
    pub paths: Paths,
    /// Sup-norm increments of the last inner solve.
    pub increments: Vec<f64>,
    /// Sup-norm `|w0' - w0|` per outer step.
    pub outer_residuals: Vec<f64>,
}

impl DensityState {
    pub fn y0_node(&self, i: usize) -> f64 {
        self.paths.y0(2 * i)
    }

    pub fn y1_node(&self, i: usize) -> f64 {
        self.paths.y1(2 * i)
    }

    pub fn c_node(&self, i: usize) -> f64 {
        self.paths.c_of_t(2 * i)
    }

    /// Empirical contraction ratios `|D_{k+1}| / |D_k|` of the last inner solve.
    pub fn ratios(&self) -> Vec<f64> {
        ratios(&self.increments)
    }

    pub fn chi_norm(&self) -> f64 {
        sup(&self.chi1) + sup(&self.chi2)
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn ratios(inc: &[f64]) -> Vec<f64> {
    inc.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect()
}

/// Heat-frame solver for one time segment.
#[derive(Debug, Clone)]
pub struct Solver {
    pub tp: TransformedProblem,
    pub flux: Flux,
    pub grid: TimeGrid,
    pub opts: SolverOptions,
    /// Upper end of the admissible `w0` box.
    pub r_bound: f64,
}

impl Solver {
    pub fn new(tp: TransformedProblem, flux: Flux, grid: TimeGrid, opts: SolverOptions, ledger: &ConstantsLedger) -> Self {
        Self { tp, flux, grid, opts, r_bound: ledger.r }
    }

    fn bd(&self) -> BoundaryData {
        BoundaryData { c1: self.tp.c1, c2: self.tp.c2, d: self.tp.d, beta: self.tp.beta }
    }

    pub fn free_boundaries(&self, chi1: &[f64], chi2: &[f64], w0: &[f64]) -> Result<Paths> {
        free_boundaries(chi1, chi2, w0, &self.flux, &self.grid, self.bd())
    }

    /// One application of the density map; boundaries follow the input pair.
    pub fn apply_psi(&self, chi1: &[f64], chi2: &[f64], w0: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let paths = self.free_boundaries(chi1, chi2, w0)?;
        Ok(self.psi_on(&paths, chi1, chi2, w0))
    }

    fn psi_on(&self, paths: &Paths, chi1: &[f64], chi2: &[f64], w0: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let field = Field::new(&self.tp, &self.flux, self.grid, paths, chi1, chi2, w0, self.opts.near_cells);
        let j = self.opts.jump.factor(self.tp.d);
        let out: Vec<(f64, f64)> = (0..self.grid.n)
            .into_par_iter()
            .map(|i| {
                let (a, b) = field.psi_terms(i);
                (j * a, j * b)
            })
            .collect();
        out.into_iter().unzip()
    }

    /// Picard iteration from the zero pair.
    pub fn inner_solve(&self, w0: &[f64]) -> Result<DensityState> {
        let zero = vec![0.0; self.grid.n];
        self.inner_solve_from(w0, &zero, &zero)
    }

    /// Picard iteration from a given starting pair.
    pub fn inner_solve_from(&self, w0: &[f64], chi1: &[f64], chi2: &[f64]) -> Result<DensityState> {
        let (mut c1, mut c2) = (chi1.to_vec(), chi2.to_vec());
        let mut increments = Vec::new();
        for _ in 0..self.opts.inner_max {
            let (n1, n2) = self.apply_psi(&c1, &c2, w0)?;
            let inc = c1.iter().zip(&n1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
                + c2.iter().zip(&n2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            increments.push(inc);
            c1 = n1;
            c2 = n2;
            if inc <= self.opts.inner_tol {
                let paths = self.free_boundaries(&c1, &c2, w0)?;
                return Ok(DensityState {
                    grid: self.grid,
                    chi1: c1,
                    chi2: c2,
                    w0: w0.to_vec(),
                    paths,
                    increments,
                    outer_residuals: Vec::new(),
                });
            }
            if !inc.is_finite() {
                break;
            }
        }
        let last = increments.last().copied().unwrap_or(f64::NAN);
        Err(Error::NoConvergence { stage: "inner", iterations: increments.len(), last, ratios: ratios(&increments) })
    }

    pub fn field<'a>(&'a self, state: &'a DensityState) -> Field<'a> {
        Field::new(&self.tp, &self.flux, self.grid, &state.paths, &state.chi1, &state.chi2, &state.w0, self.opts.near_cells)
    }

    /// `w(y, t_i)` from the integral representation.
    pub fn reconstruct_w(&self, state: &DensityState, y: f64, i: usize) -> Result<f64> {
        let (lo, hi) = (state.y0_node(i), state.y1_node(i));
        let tol = 1e-12 * (1.0 + hi.abs());
        if !(y >= lo - tol && y <= hi + tol) {
            return Err(Error::OutOfDomain { y, lo, hi, t: self.grid.node(i) });
        }
        Ok(self.field(state).field_at(Pos { base: self.tp.c1, off: y - self.tp.c1 }, i))
    }

    /// `w` on the uniform slice `y0 + theta (y1 - y0)` at node `i`.
    pub fn slice(&self, field: &Field<'_>, paths: &Paths, i: usize, points: usize) -> Vec<f64> {
        let k = 2 * i;
        let width = (paths.c2 - paths.c1) + (paths.d1[k] - paths.d0[k]);
        (0..points)
            .map(|p| {
                let theta = p as f64 / (points - 1) as f64;
                let off = if p + 1 == points { paths.d1[k] } else { paths.d0[k] + theta * width };
                let base = if p + 1 == points { paths.c2 } else { paths.c1 };
                field.field_at(Pos { base, off }, i)
            })
            .collect()
    }

    /// `w0'(t) = C(t) + (1/D) int_{y0}^{y1} w`.
    pub fn phi_update(&self, state: &DensityState) -> Vec<f64> {
        let field = self.field(state);
        let np = self.opts.slice_points;
        (0..=self.grid.n)
            .into_par_iter()
            .map(|i| {
                let w = self.slice(&field, &state.paths, i, np);
                let k = 2 * i;
                let width = (state.paths.c2 - state.paths.c1) + (state.paths.d1[k] - state.paths.d0[k]);
                state.paths.c_of_t(k) + simpson_uniform(&w, width / (np - 1) as f64) / self.tp.d
            })
            .collect()
    }

    /// Fixed point in `w0`, each step solving the inner density system.
    pub fn outer_solve(&self) -> Result<DensityState> {
        self.outer_solve_with(|_, _| {})
    }

    /// As [`Solver::outer_solve`], reporting `(step, |w0' - w0|)` after each step.
    pub fn outer_solve_with<F: FnMut(usize, f64)>(&self, mut progress: F) -> Result<DensityState> {
        let mut w0 = vec![1.0; self.grid.n + 1];
        let mut residuals = Vec::new();
        let mut warm: Option<(Vec<f64>, Vec<f64>)> = None;
        for step in 0..self.opts.outer_max {
            let mut state = match &warm {
                Some((a, b)) => self.inner_solve_from(&w0, a, b)?,
                None => self.inner_solve(&w0)?,
            };
            let next = self.phi_update(&state);
            let res = next.iter().zip(&w0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            residuals.push(res);
            progress(step, res);
            if res <= self.opts.outer_tol {
                state.outer_residuals = residuals;
                return Ok(state);
            }
            if !res.is_finite() {
                break;
            }
            let om = self.opts.relax;
            for (w, n) in w0.iter_mut().zip(&next) {
                *w = ((1.0 - om) * *w + om * n).clamp(1.0, self.r_bound);
            }
            warm = Some((state.chi1, state.chi2));
        }
        let last = residuals.last().copied().unwrap_or(f64::NAN);
        Err(Error::NoConvergence { stage: "outer", iterations: residuals.len(), last, ratios: ratios(&residuals) })
    }
}
