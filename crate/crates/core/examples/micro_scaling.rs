//! Size of the micro part `w` and of the defect source `E` as functions of eps.
//!
//! Run with `cargo run --release --example micro_scaling`.

use stiffscale::harness::{fit_order, micro_profile, Case, ProblemBlock, ProblemKind};
use stiffscale::problems::toy::T_END;

fn main() -> stiffscale::Result<()> {
    let eps_list: Vec<f64> = (3..=12).map(|k| 2f64.powi(-k)).collect();
    let block = ProblemBlock::new(ProblemKind::Toy);
    for n in 0..=2 {
        let profiles = eps_list
            .iter()
            .map(|&eps| micro_profile(&Case::new(&block, eps)?, n, T_END, 2f64.powi(-10)))
            .collect::<stiffscale::Result<Vec<_>>>()?;
        let w: Vec<(f64, f64)> = profiles.iter().map(|p| (p.eps, p.w_sup)).collect();
        print!("n = {n}: sup|w| slope {:.3}", fit_order(&w)?.slope);
        if n > 0 {
            let w0: Vec<(f64, f64)> = profiles.iter().map(|p| (p.eps, p.w0)).collect();
            let e: Vec<(f64, f64)> = profiles.iter().map(|p| (p.eps, p.e_sup)).collect();
            print!(", |w(0)| slope {:.3}, sup|E| slope {:.3}", fit_order(&w0)?.slope, fit_order(&e)?.slope);
        } else {
            print!(", max |w(0)| = {:.1e}", profiles.iter().map(|p| p.w0).fold(0.0, f64::max));
        }
        println!();
    }
    Ok(())
}
