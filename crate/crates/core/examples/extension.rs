//! Chain segments past a single horizon and stitch them into one trajectory.
//!
//! `cargo run --release --example extension`

use freebound::problem::{C1Choice, Flux, FluxForm, PhysicalProblem, Profile, TransformedProblem, DEFAULT_TABLE_POINTS};
use freebound::volterra::{extend_solution, ExtensionPlan, SegmentHorizon, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let flux = Flux::new(FluxForm::Linear { a: 0.05, c: 0.05 })?;
    let p = PhysicalProblem { d: 1.0, beta: 1.0, b: 1.0, u0: Profile::quadratic(1.0, 1.0, 0.05, 0.05), flux };
    let tp = TransformedProblem::build(&p, C1Choice::Auto, DEFAULT_TABLE_POINTS)?;
    let plan = ExtensionPlan { segments: 3, steps: 32, horizon: SegmentHorizon::Fixed(0.05), opts: SolverOptions::default() };
    let ext = extend_solution(tp, p.flux.clone(), &plan)?;
    for seg in &ext.segments {
        println!("segment from t = {:.3}: C1 = {:.6}, y offset {:.6}, scale {:.6}, sigma* {:.3e}", seg.t0, seg.solver.tp.c1, seg.y_offset, seg.scale, seg.ledger.sigma_star);
    }
    let sol = ext.physical(33)?;
    for (t, s) in sol.times().iter().zip(sol.fronts()).step_by(8) {
        println!("t = {t:.4}  s = {s:.10}");
    }
    Ok(())
}
