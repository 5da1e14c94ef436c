//! Uniform accuracy on the toy oscillator: the error envelope over eps decays like dt^q.
//!
//! Run with `cargo run --release --example toy_uniform`.

use stiffscale::harness::{fit_order, run_sweep, uniform_envelope, NormKind, ProblemBlock, ProblemKind, SolveMode, SweepConfig};

fn main() -> stiffscale::Result<()> {
    for (n, q) in [(1, 2), (2, 3)] {
        let cfg = SweepConfig::new(ProblemBlock::new(ProblemKind::Toy), SolveMode::Micromacro, n, q);
        let out = run_sweep(&cfg)?;
        let env = uniform_envelope(&out.records, NormKind::Mod);
        println!("n = {n}, q = {q}");
        for (dt, e) in &env {
            println!("  dt = {dt:.3e}  max over eps = {e:.3e}");
        }
        let fit = fit_order(&env)?;
        println!("  slope {:.3}, residual {:.1e}", fit.slope, fit.residual);
    }
    Ok(())
}
