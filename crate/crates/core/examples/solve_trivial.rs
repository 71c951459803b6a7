//! Constant data: the densities vanish and the front moves at speed beta.
//!
//! `cargo run --release --example solve_trivial`

use freebound::physical::invert_all;
use freebound::problem::{C1Choice, PhysicalProblem, TransformedProblem, DEFAULT_TABLE_POINTS};
use freebound::quadrature::TimeGrid;
use freebound::volterra::{compute_constants, Solver, SolverOptions};

fn main() -> freebound::Result<()> {
    let p = PhysicalProblem::trivial(1.0, 1.0, 1.0);
    let tp = TransformedProblem::build(&p, C1Choice::Auto, DEFAULT_TABLE_POINTS)?;
    let ledger = compute_constants(&tp)?;
    let solver = Solver::new(tp, p.flux.clone(), TimeGrid::new(0.5, 64)?, SolverOptions::default(), &ledger);
    let state = solver.outer_solve()?;
    println!("sup |chi| = {:e}, w0 in [{}, {}]", state.chi_norm(), state.w0.iter().cloned().fold(f64::MAX, f64::min), state.w0.iter().cloned().fold(f64::MIN, f64::max));
    let sol = invert_all(&solver, &state, 33)?;
    for sl in sol.slices.iter().step_by(16) {
        let u_err = sl.u.iter().fold(0.0f64, |m, u| m.max((u - p.beta).abs()));
        println!("t = {:.4}  s = {:.12}  b + beta t = {:.12}  sup |u - beta| = {u_err:e}", sl.t, sl.front(), p.b + p.beta * sl.t);
    }
    Ok(())
}
