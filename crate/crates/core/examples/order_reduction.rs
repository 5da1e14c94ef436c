//! Direct ERK2 on the toy oscillator loses an order once eps < dt.
//!
//! Run with `cargo run --release --example order_reduction`.

use stiffscale::harness::{run_experiment, ExperimentName, ProblemKind};

fn main() -> stiffscale::Result<()> {
    let report = run_experiment(ExperimentName::OrderReduction, ProblemKind::Toy, None)?;
    for s in &report.slopes {
        println!("{}: uniform slope {:.3}", s.label, s.uniform.slope);
        for e in &s.per_eps {
            match e.slope {
                Some(p) => println!("  eps = {:.3e}: slope {p:.2}", e.eps),
                None => println!("  eps = {:.3e}: at roundoff", e.eps),
            }
        }
    }
    for g in &report.gates {
        println!("{}", g.describe());
    }
    Ok(())
}
