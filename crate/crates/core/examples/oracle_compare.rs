//! Cross-check the integral solution against the front-fixing finite differences.
//!
//! `cargo run --release --example oracle_compare`

use freebound::oracle::{compare, solve_frontfix, FrontFixGrid};
use freebound::physical::invert_all;
use freebound::problem::{C1Choice, Flux, FluxForm, PhysicalProblem, Profile, TransformedProblem, DEFAULT_TABLE_POINTS};
use freebound::quadrature::TimeGrid;
use freebound::volterra::{compute_constants, Solver, SolverOptions};

fn main() -> freebound::Result<()> {
    let flux = Flux::new(FluxForm::Linear { a: 0.05, c: 0.05 })?;
    let p = PhysicalProblem { d: 1.0, beta: 1.0, b: 1.0, u0: Profile::quadratic(1.0, 1.0, 0.05, 0.05), flux };
    let tp = TransformedProblem::build(&p, C1Choice::Auto, DEFAULT_TABLE_POINTS)?;
    let ledger = compute_constants(&tp)?;
    let solver = Solver::new(tp, p.flux.clone(), TimeGrid::new(0.1, 64)?, SolverOptions::default(), &ledger);
    let state = solver.outer_solve()?;
    let sol = invert_all(&solver, &state, 65)?;

    for nx in [50, 100, 200] {
        let o = solve_frontfix(&p, FrontFixGrid { nx, safety: 0.4 }, &sol.times())?;
        let c = compare(&sol, &o)?;
        println!("Nx = {nx:<4} steps {:<7} front sup error {:.3e}  profile sup error {:.3e}", o.steps, c.s_sup, c.u_linf_sup());
    }
    Ok(())
}
