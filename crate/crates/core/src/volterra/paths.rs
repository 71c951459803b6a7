//! Free boundaries on the half-grid (nodes and midpoints).
//!
//! Positions are stored as displacements from their initial values so that
//! tiny horizons keep full relative precision in separations.

use crate::error::{Error, Result};
use crate::problem::Flux;
use crate::quadrature::TimeGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct Paths {
    pub c1: f64,
    pub c2: f64,
    /// `y0 - C1` at half-index `k` (time `k h / 2`).
    pub d0: Vec<f64>,
    /// `y1 - C2` at half-index `k`.
    pub d1: Vec<f64>,
    /// `int_0^t chi1` at half-index `k`.
    pub cum1: Vec<f64>,
}

impl Paths {
    pub fn y0(&self, k: usize) -> f64 {
        self.c1 + self.d0[k]
    }

    pub fn y1(&self, k: usize) -> f64 {
        self.c2 + self.d1[k]
    }

    /// `C(t) = 1 - int_0^t chi1`.
    pub fn c_of_t(&self, k: usize) -> f64 {
        1.0 - self.cum1[k]
    }

    pub fn half_len(&self) -> usize {
        self.d0.len()
    }
}

/// Physical constants entering the boundary formulas.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryData {
    pub c1: f64,
    pub c2: f64,
    pub d: f64,
    pub beta: f64,
}

/// `w0` at the representative time of the cell starting at node `j`:
/// the midpoint for a full cell, the quarter point for the half cell.
pub fn w0_cell(w0: &[f64], j: usize, half: bool) -> f64 {
    if half {
        0.75 * w0[j] + 0.25 * w0[j + 1]
    } else {
        0.5 * (w0[j] + w0[j + 1])
    }
}

/// `y0(t) = C1 - beta t - int g + int chi2 / w0` and
/// `y1(t) = C2 + (1 - beta) t + (D (beta + 1) / beta^2) log(1 - int chi1)`,
/// with piecewise-constant densities on each cell.
pub fn free_boundaries(chi1: &[f64], chi2: &[f64], w0: &[f64], flux: &Flux, grid: &TimeGrid, bd: BoundaryData) -> Result<Paths> {
    let n = grid.n;
    debug_assert!(chi1.len() == n && chi2.len() == n && w0.len() == n + 1);
    let h = grid.h();
    let k_log = bd.d * (bd.beta + 1.0) / (bd.beta * bd.beta);
    let len = 2 * n + 1;
    let (mut d0, mut d1, mut cum1) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    let (mut i1, mut i2) = (0.0, 0.0);
    for k in 0..len {
        if k > 0 {
            let j = (k - 1) / 2;
            // Half step from node j to mid j, or from mid j to node j+1.
            i1 += 0.5 * h * chi1[j];
            let wq = if k % 2 == 1 { w0_cell(w0, j, true) } else { 0.75 * w0[j + 1] + 0.25 * w0[j] };
            i2 += 0.5 * h * chi2[j] / wq;
        }
        let t = grid.half(k);
        if !(i1 < 1.0) {
            return Err(Error::HorizonExceeded { t, what: format!("int chi1 = {i1} reached 1") });
        }
        cum1[k] = i1;
        d0[k] = -bd.beta * t - flux.integral(t) + i2;
        d1[k] = (1.0 - bd.beta) * t + k_log * (-i1).ln_1p();
    }
    Ok(Paths { c1: bd.c1, c2: bd.c2, d0, d1, cum1 })
}
