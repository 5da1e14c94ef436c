//! φ-functions of the exponential schemes, including the small-argument branch.
//!
//! Run with `cargo run --example phi_functions`.

use stiffscale::expkit::{phi, PhiEvaluator};
use stiffscale::C64;

fn main() {
    let ev = PhiEvaluator::default();
    println!("{:>10} {:>22} {:>22} {:>22}", "z", "φ1(z)", "φ2(z)", "φ3(z)");
    for z in [-100.0, -10.0, -1.0, -1e-3, -1e-8, 0.0, 1e-8, 1.0] {
        let [_, p1, p2, p3] = ev.eval_all(C64::new(z, 0.0));
        println!("{z:>10.0e} {:>22.15e} {:>22.15e} {:>22.15e}", p1.re, p2.re, p3.re);
    }

    // both branches agree near the switch point
    let z = C64::new(-0.05, 0.02);
    for k in 1..=3 {
        let (t, r) = (ev.taylor(k, z), ev.recurrence(k, z));
        println!("φ{k}({z}): series {t:.15}, recurrence {r:.15}, |diff| = {:.1e}", (t - r).norm());
    }
    println!("φ1(i) = {:.12}", phi(1, C64::new(0.0, 1.0)));
}
