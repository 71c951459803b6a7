//! Full solve on generic data with residuals of the original problem.
//!
//! `cargo run --release --example solve_generic`

use freebound::physical::{invert_all, residual_report};
use freebound::problem::{validate_problem, C1Choice, Flux, FluxForm, PhysicalProblem, Profile, TransformedProblem, DEFAULT_TABLE_POINTS};
use freebound::quadrature::TimeGrid;
use freebound::volterra::{compute_constants, Solver, SolverOptions};

fn main() -> freebound::Result<()> {
    let flux = Flux::new(FluxForm::Linear { a: 0.05, c: 0.05 })?;
    let p = PhysicalProblem { d: 1.0, beta: 1.0, b: 1.0, u0: Profile::quadratic(1.0, 1.0, 0.05, 0.05), flux };
    assert!(validate_problem(&p).passed());
    let tp = TransformedProblem::build(&p, C1Choice::Auto, DEFAULT_TABLE_POINTS)?;
    let ledger = compute_constants(&tp)?;

    // Past the certified horizon the iteration still converges for this data.
    let grid = TimeGrid::new(0.1, 64)?;
    let solver = Solver::new(tp, p.flux.clone(), grid, SolverOptions::default(), &ledger);
    let state = solver.outer_solve_with(|k, r| println!("outer {k}: increment {r:.3e}"))?;
    println!("inner contraction ratios {:?}", state.ratios());

    let sol = invert_all(&solver, &state, 65)?;
    let rep = residual_report(&sol, &solver, &state)?;
    println!("sup |D u_x(0) - g|  = {:.3e}", rep.sup_neumann());
    println!("sup |u(s) - beta|   = {:.3e}", rep.sup_dirichlet());
    println!("sup |w(y1)|         = {:.3e}", rep.sup_front_trace());
    println!("sup stefan residual = {:.3e}", rep.sup_stefan());
    for i in [0, 16, 32, 48, 64] {
        let sl = &sol.slices[i];
        println!("t = {:.4}  s = {:.10}  u(0) = {:.10}  C = {:.8}", sl.t, sl.front(), sl.u[0], state.c_node(i));
    }
    Ok(())
}
