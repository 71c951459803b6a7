//! Residuals of the reconstructed solution against the original problem.

use freebound::physical::{invert_all, residual_report, ResidualReport};
use freebound::problem::{C1Choice, Flux, FluxForm, PhysicalProblem, Profile, TransformedProblem, DEFAULT_TABLE_POINTS};
use freebound::quadrature::TimeGrid;
use freebound::volterra::{compute_constants, Solver, SolverOptions};

fn rising_flux() -> PhysicalProblem {
    let flux = Flux::new(FluxForm::Linear { a: 0.05, c: 0.05 }).unwrap();
    PhysicalProblem { d: 1.0, beta: 1.0, b: 1.0, u0: Profile::quadratic(1.0, 1.0, 0.05, flux.eval(0.0)), flux }
}

fn residuals(p: &PhysicalProblem, sigma: Option<f64>, steps: usize, slice_points: usize) -> ResidualReport {
    let tp = TransformedProblem::build(p, C1Choice::Auto, DEFAULT_TABLE_POINTS).unwrap();
    let ledger = compute_constants(&tp).unwrap();
    let grid = TimeGrid::new(sigma.unwrap_or(ledger.sigma_star), steps).unwrap();
    let solver = Solver::new(tp, p.flux.clone(), grid, SolverOptions { slice_points, ..SolverOptions::default() }, &ledger);
    let state = solver.outer_solve().unwrap();
    let sol = invert_all(&solver, &state, slice_points).unwrap();
    residual_report(&sol, &solver, &state).unwrap()
}

#[test]
fn constant_state_has_no_residual() {
    let p = PhysicalProblem { d: 1.0, beta: 1.0, b: 1.0, u0: Profile::Constant { value: 1.0 }, flux: Flux::constant(0.0) };
    let r = residuals(&p, Some(0.1), 256, 65);
    for (name, v) in [("neumann", r.sup_neumann()), ("dirichlet", r.sup_dirichlet()), ("stefan", r.sup_stefan()), ("pde", r.sup_pde().unwrap())] {
        assert!(v <= 1e-8, "{name} {v:.3e}");
    }
}

#[test]
fn stefan_residual_is_small_at_default_resolution() {
    let p = rising_flux();
    for sigma in [None, Some(0.1)] {
        let r = residuals(&p, sigma, 256, 65);
        assert!(r.sup_stefan() <= 0.05 * p.beta, "{sigma:?}: {:.3e}", r.sup_stefan());
    }
}

#[test]
fn interior_pde_residual_converges_under_refinement() {
    let p = rising_flux();
    let coarse = residuals(&p, Some(0.1), 256, 257).sup_pde_interior().unwrap();
    let fine = residuals(&p, Some(0.1), 512, 513).sup_pde_interior().unwrap();
    assert!(coarse >= 1.8 * fine, "{coarse:.3e} -> {fine:.3e}");
}
