//! Relaxed conservation law on a periodic grid: one micro-macro run per eps, with mass drift.
//!
//! Run with `cargo run --release --example conservation_law`.

use stiffscale::expkit::ErkScheme;
use stiffscale::harness::{compute_reference, micromacro_trajectory, uniform_grid, Case, ProblemBlock, ProblemKind};
use stiffscale::problems::conservation::T_END;

fn main() -> stiffscale::Result<()> {
    let block = ProblemBlock::new(ProblemKind::Conservation);
    let dt = 2f64.powi(-6);
    let grid = uniform_grid(T_END, dt);
    for eps in [1.0, 2f64.powi(-6), 2f64.powi(-12)] {
        let case = Case::new(&block, eps)?;
        let law = case.law().expect("conservation case");
        let run = micromacro_trajectory(&case, 1, &ErkScheme::erk3(), &grid, dt)?;
        let (reference, info) = compute_reference(&case, &grid)?;
        let mut err: f64 = 0.0;
        for (a, b) in run.u.iter().zip(&reference.u) {
            err = err.max(case.norms(&[&a[0] - &b[0]])?.h1.unwrap_or(0.0));
        }
        let m0 = law.mass(&run.u[0][0]);
        let drift = run.u.iter().map(|u| (law.mass(&u[0]) - m0).abs()).fold(0.0, f64::max);
        println!(
            "eps = {eps:.2e}: modified H¹ error {err:.3e}, mass drift {drift:.1e}, reference levels {}",
            info.levels
        );
    }
    Ok(())
}
