//! Chained restarts past the certified horizon.
//!
//! Each segment starts from the inverted final slice of the previous one,
//! rescaled so that `C = 1` and shifted so that the face sits at a quarter of
//! the current width. Offsets and scales map every segment back to the frame
//! of the first one.

use crate::error::{Error, Result};
use crate::physical::{invert_all, invert_state, PhysicalSolution, Slice};
use crate::problem::{Flux, TransformedProblem, FLUX_NORM_WINDOW};
use crate::quadrature::TimeGrid;

use super::constants::{compute_constants, ConstantsLedger};
use super::solve::{DensityState, Solver, SolverOptions};

/// Length of each segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentHorizon {
    /// The certified horizon of each segment's own constants.
    Certified,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionPlan {
    pub segments: usize,
    /// Time steps per segment.
    pub steps: usize,
    pub horizon: SegmentHorizon,
    pub opts: SolverOptions,
}

/// One solved segment and its map to the frame of the first segment.
#[derive(Debug, Clone)]
pub struct Segment {
    /// Global start time.
    pub t0: f64,
    /// Added to local `y` to obtain the first segment's `y`.
    pub y_offset: f64,
    /// Multiplies local `w`, `C`, `w0` and the densities.
    pub scale: f64,
    pub ledger: ConstantsLedger,
    pub solver: Solver,
    pub state: DensityState,
}

impl Segment {
    pub fn t_end(&self) -> f64 {
        self.t0 + self.solver.grid.sigma
    }

    /// Inverted slices at every node, on the segment's own clock and frame.
    pub fn local_physical(&self, ny: usize) -> Result<PhysicalSolution> {
        invert_all(&self.solver, &self.state, ny)
    }

    /// Map a local slice to the global clock and frame.
    pub fn to_global(&self, mut s: Slice) -> Slice {
        s.t += self.t0;
        s.y.iter_mut().for_each(|y| *y += self.y_offset);
        s.w.iter_mut().for_each(|w| *w *= self.scale);
        s
    }
}

#[derive(Debug, Clone, Default)]
pub struct Extended {
    pub segments: Vec<Segment>,
}

/// A chain stopped early; the completed segments are kept.
#[derive(Debug, thiserror::Error)]
#[error("segment {segment} failed: {source}")]
pub struct ExtensionFailure {
    pub segment: usize,
    pub completed: Extended,
    #[source]
    pub source: Error,
}

impl Extended {
    pub fn t_end(&self) -> f64 {
        self.segments.last().map_or(0.0, Segment::t_end)
    }

    /// Global node samples `(t, y0, y1, C)`, without repeating join nodes.
    pub fn boundaries(&self) -> Vec<[f64; 4]> {
        let mut out = Vec::new();
        for (k, seg) in self.segments.iter().enumerate() {
            for i in usize::from(k > 0)..=seg.solver.grid.n {
                out.push([
                    seg.t0 + seg.solver.grid.node(i),
                    seg.state.y0_node(i) + seg.y_offset,
                    seg.state.y1_node(i) + seg.y_offset,
                    seg.scale * seg.state.c_node(i),
                ]);
            }
        }
        out
    }

    /// Global midpoint samples `(t, chi1, chi2)` followed by node samples `(t, w0)`.
    pub fn densities(&self) -> (Vec<[f64; 3]>, Vec<[f64; 2]>) {
        let (mut mids, mut nodes) = (Vec::new(), Vec::new());
        for (k, seg) in self.segments.iter().enumerate() {
            let g = seg.solver.grid;
            for i in 0..g.n {
                mids.push([seg.t0 + g.mid(i), seg.scale * seg.state.chi1[i], seg.scale * seg.state.chi2[i]]);
            }
            for i in usize::from(k > 0)..=g.n {
                nodes.push([seg.t0 + g.node(i), seg.scale * seg.state.w0[i]]);
            }
        }
        (mids, nodes)
    }

    /// Inverted slices on the global clock and frame.
    pub fn physical(&self, ny: usize) -> Result<PhysicalSolution> {
        let mut slices = Vec::new();
        for (k, seg) in self.segments.iter().enumerate() {
            let local = seg.local_physical(ny)?;
            slices.extend(local.slices.into_iter().skip(usize::from(k > 0)).map(|s| seg.to_global(s)));
        }
        Ok(PhysicalSolution { slices })
    }
}

fn horizon(plan: &ExtensionPlan, ledger: &ConstantsLedger) -> Result<f64> {
    let sigma = match plan.horizon {
        SegmentHorizon::Certified => ledger.sigma_star,
        SegmentHorizon::Fixed(s) => s,
    };
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("segment horizon must be positive and finite, got {sigma}")));
    }
    Ok(sigma)
}

fn solve_segment(tp: TransformedProblem, flux: Flux, plan: &ExtensionPlan) -> Result<(ConstantsLedger, Solver, DensityState)> {
    let ledger = compute_constants(&tp)?;
    let grid = TimeGrid::new(horizon(plan, &ledger)?, plan.steps)?;
    let solver = Solver::new(tp, flux, grid, plan.opts, &ledger);
    let state = solver.outer_solve()?;
    Ok((ledger, solver, state))
}

/// Data of the segment that continues `seg` from its final node.
fn restart(seg: &Segment, points: usize) -> Result<(TransformedProblem, Flux)> {
    let (solver, state) = (&seg.solver, &seg.state);
    let n = solver.grid.n;
    let slice = invert_state(solver, state, n, points)?;
    let width = slice.y[points - 1] - slice.y[0];
    let c1 = 0.25 * width;
    let v0: Vec<f64> = slice.u.iter().map(|u| u - solver.tp.beta).collect();
    let flux = solver.flux.shifted(solver.grid.sigma);
    let g_norm = flux.sup_norm(FLUX_NORM_WINDOW);
    let tp = TransformedProblem::from_trace(c1, c1 + width, solver.tp.d, solver.tp.beta, v0, g_norm, slice.front())?;
    Ok((tp, flux))
}

/// Solve `plan.segments` chained segments starting from `tp`.
pub fn extend_solution(tp: TransformedProblem, flux: Flux, plan: &ExtensionPlan) -> std::result::Result<Extended, ExtensionFailure> {
    let mut done = Extended::default();
    let fail = |segment: usize, completed: Extended, source: Error| ExtensionFailure { segment, completed, source };
    if plan.segments == 0 {
        return Err(fail(0, done, Error::InvalidInput("at least one segment is required".into())));
    }
    let points = tp.points();
    let mut next = (tp, flux);
    for k in 0..plan.segments {
        let (ledger, solver, state) = match solve_segment(next.0, next.1, plan) {
            Ok(v) => v,
            Err(e) => return Err(fail(k, done, e)),
        };
        let (t0, y_offset, scale) = match done.segments.last() {
            None => (0.0, 0.0, 1.0),
            Some(prev) => {
                let n = prev.solver.grid.n;
                (prev.t_end(), prev.state.y0_node(n) + prev.y_offset - solver.tp.c1, prev.scale * prev.state.c_node(n))
            }
        };
        done.segments.push(Segment { t0, y_offset, scale, ledger, solver, state });
        if k + 1 == plan.segments {
            break;
        }
        next = match restart(done.segments.last().expect("segment just pushed"), points) {
            Ok(v) => v,
            Err(e) => return Err(fail(k + 1, done, e)),
        };
    }
    Ok(done)
}
