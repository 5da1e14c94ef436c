//! A user-defined polynomial problem: derive a decomposition and solve it uniformly in eps.
//!
//! `x' = -x z,  z' = -z/eps + x²`. Run with `cargo run --release --example custom_problem`.

use std::sync::Arc;

use stiffscale::autoderive::{derive_decomposition, PolyVectorField};
use stiffscale::expkit::{integrate, ErkScheme};
use stiffscale::harness::uniform_grid;
use stiffscale::micromacro::{solve_micromacro, Decomposition, SolveOptions};
use stiffscale::state::re;
use stiffscale::{SemilinearProblem, State};

fn main() -> stiffscale::Result<()> {
    let mut f = PolyVectorField::zero(2);
    f.add_term(0, re(-1.0), &[1, 1]);
    f.add_term(1, re(1.0), &[2, 0]);
    let problem = SemilinearProblem::from_polynomial("quadratic", 1, vec![0, 1], f.clone())?;
    let set = Arc::new(derive_decomposition(&f, problem.lambda(), 1)?);

    let u0 = State::from_real(&[1.0, 0.5]);
    let grid = uniform_grid(1.0, 1.0 / 16.0);
    let scheme = ErkScheme::erk2();
    for eps in [1e-1, 1e-3, 1e-6] {
        let d = Decomposition::new(set.at_eps(eps), "quadratic n = 1");
        let mm = solve_micromacro(&d, &problem, &scheme, &u0, &grid, &SolveOptions::with_step(f64::INFINITY))?;
        let fine = integrate(&ErkScheme::erk3(), &problem, eps, &u0, &grid, eps.min(1e-3) / 4.0)?;
        let err = mm.iter().zip(&fine).map(|(a, b)| (&a.u - b).norm()).fold(0.0, f64::max);
        let direct = integrate(&scheme, &problem, eps, &u0, &grid, f64::INFINITY)?;
        let derr = direct.iter().zip(&fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("eps = {eps:.0e}: micro-macro error {err:.2e}, direct ERK2 error {derr:.2e}");
    }
    Ok(())
}
