//! Heat kernels and their closed-form integrals along a moving source.
//!
//! `cargo run --example kernels`

use freebound::kernels::{eval_image_kernel, flux_integral, heat, mass_integral, Deriv, ImageKind, KernelQuery, Limit};

fn main() -> freebound::Result<()> {
    let d = 1.0;
    println!("heat kernel k(r, s) at s = 0.1");
    for r in [0.0, 0.25, 0.5, 1.0] {
        println!("  r = {r:<5} k = {:.12e}", heat(r, 0.1, d));
    }

    // Odd image vanishes on the face, even image has zero slope there.
    let q = KernelQuery::new(0.0, 1.2, 0.4, 1.0, d);
    let green = eval_image_kernel(ImageKind::Green, Deriv::None, &q)?;
    let neumann_dx = eval_image_kernel(ImageKind::Neumann, Deriv::Dx, &q)?;
    println!("green at face {green:e}, neumann slope at face {neumann_dx:e}");

    // Source at separation eps + v s over elapsed times [0, 0.2].
    let (eps, v) = (0.1, 0.5);
    println!("mass integral {:.12e}", mass_integral(eps, v, 0.0, 0.2, d));
    println!("flux integral {:.12e}", flux_integral(eps, v, 0.0, 0.2, d, Limit::Principal));
    // On the source itself the one-sided limit picks up the half-density jump 1/(2D).
    let on = flux_integral(0.0, v, 0.0, 0.2, d, Limit::Principal);
    let side = flux_integral(0.0, v, 0.0, 0.2, d, Limit::Positive);
    println!("jump across the source {:.12e} (expected {:.12e})", side - on, 0.5 / d);
    Ok(())
}
