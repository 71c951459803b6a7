//! Map physical data to the heat-equation frame and back.
//!
//! `cargo run --example transform_roundtrip`

use freebound::physical::invert_samples;
use freebound::problem::{validate_problem, C1Choice, Flux, PhysicalProblem, Profile, TransformedProblem, DEFAULT_TABLE_POINTS};

fn main() -> freebound::Result<()> {
    let flux = Flux::constant(0.08);
    let p = PhysicalProblem { d: 0.8, beta: 1.0, b: 1.0, u0: Profile::quadratic(1.0, 1.0, 0.2, 0.08 / 0.8), flux };
    println!("{}", validate_problem(&p));

    let tp = TransformedProblem::build(&p, C1Choice::Auto, DEFAULT_TABLE_POINTS)?;
    println!("heat frame [C1, C2] = [{:.6}, {:.6}], sup |F| = {:.6e}", tp.c1, tp.c2, tp.f_sup());

    // Inverting the initial trace with C = 1 must give back u0 and the front b.
    let sl = invert_samples(p.d, p.beta, 1.0, tp.c1, tp.c2, 0.0, tp.f.clone())?;
    let err = sl.x.iter().zip(&sl.u).fold(0.0f64, |m, (x, u)| m.max((u - p.u0.eval(*x)).abs()));
    println!("front {:.12} (b = {}), sup |u - u0| = {err:.3e}", sl.front(), p.b);
    Ok(())
}
