//! Data close to equilibrium: an order-1 decomposition already gives order 3 in the plain norm.
//!
//! Run with `cargo run --release --example near_equilibrium`.

use stiffscale::harness::{run_experiment, ExperimentName, ProblemKind};

fn main() -> stiffscale::Result<()> {
    let report = run_experiment(ExperimentName::NearEquilibrium, ProblemKind::Toy, None)?;
    for s in &report.slopes {
        println!("{}: uniform slope {:.3} (residual {:.2})", s.label, s.uniform.slope, s.uniform.residual);
    }
    println!("passed: {}", report.passed());
    Ok(())
}
