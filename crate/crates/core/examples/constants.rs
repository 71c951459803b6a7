//! A-priori constants and the certified horizon.
//!
//! `cargo run --example constants`

use freebound::problem::{C1Choice, Flux, FluxForm, PhysicalProblem, Profile, TransformedProblem, DEFAULT_TABLE_POINTS};
use freebound::volterra::compute_constants;

fn main() -> freebound::Result<()> {
    let flux = Flux::new(FluxForm::Linear { a: 0.05, c: 0.05 })?;
    let p = PhysicalProblem { d: 1.0, beta: 1.0, b: 1.0, u0: Profile::quadratic(1.0, 1.0, 0.05, 0.05), flux };
    let tp = TransformedProblem::build(&p, C1Choice::Auto, DEFAULT_TABLE_POINTS)?;
    let l = compute_constants(&tp)?;
    println!("M = {:.6e}, R = {:.6e}, jump = {}", l.m, l.r, l.jump);
    for q in l.inequalities() {
        println!("  {:<14} sigma <= {:.6e}", q.name, q.bound());
    }
    println!("sigma* = {:.6e}", l.sigma_star);
    println!("violated at sigma*: {:?}", l.violations(l.sigma_star, 1e-12));
    println!("violated at 1.01 sigma*: {:?}", l.violations(1.01 * l.sigma_star, 0.0));
    Ok(())
}
