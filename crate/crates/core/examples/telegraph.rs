//! Telegraph equation: stability constants of the change of variables and a uniform H¹ sweep.
//!
//! Run with `cargo run --release --example telegraph`.

use stiffscale::harness::{fit_order, run_sweep, uniform_envelope, NormKind, ProblemBlock, ProblemKind, SolveMode, SweepConfig};
use stiffscale::problems::telegraph::{stability_lambdas, TelegraphMode};

fn main() -> stiffscale::Result<()> {
    for (k, eps) in [(1, 1.0), (12, 1e-2), (12, 1e-6)] {
        let (l, lt) = stability_lambdas(k, 2.0, eps);
        println!("k = {k:2}, eps = {eps:.0e}: λ = {l:.4}, λ̃ = {lt:.4}");
    }
    let m = TelegraphMode::new(10, 2.0, 1e-2)?;
    println!("e^(k̂²) at k = 10, eps = 1e-2: {:.3e}", m.k_hat2().exp());

    let eps: Vec<f64> = (0..=12).step_by(3).map(|k| 2f64.powi(-k)).collect();
    let dt: Vec<f64> = (6..=10).map(|k| 2f64.powi(-k)).collect();
    let cfg = SweepConfig::new(ProblemBlock::new(ProblemKind::Telegraph), SolveMode::Micromacro, 1, 3)
        .with_eps(eps)
        .with_dt(dt);
    let out = run_sweep(&cfg)?;
    let env = uniform_envelope(&out.records, NormKind::H1);
    for (dt, e) in &env {
        println!("dt = {dt:.3e}  H¹ error = {e:.3e}");
    }
    println!("uniform H¹ slope {:.3}", fit_order(&env)?.slope);
    Ok(())
}
