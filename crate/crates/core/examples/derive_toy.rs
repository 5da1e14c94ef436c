//! Symbolic averaging of the toy oscillator, checked against hand-written formulas.
//!
//! Run with `cargo run --example derive_toy`.

use stiffscale::autoderive::{derive_averaging, from_averaging, ModeConvention};
use stiffscale::harness::check::{toy_g1, toy_phi1};
use stiffscale::micromacro::defect_residual;
use stiffscale::problems::toy::{self, auto_decomposition, toy_decomposition};
use stiffscale::State;

fn main() -> stiffscale::Result<()> {
    let av = derive_averaging(&toy::polynomial(), &toy::LAMBDA, 2)?;
    let set = from_averaging(&av, &toy::LAMBDA)?;
    println!("Φ^[2]:\n{}", av.phis[2]);
    println!("G^[2] (F = iG):\n{}", set.big_g);
    println!("Ω (e^(jiθ) read as e^(-jτ)):\n{}", set.omega);

    let av1 = derive_averaging(&toy::polynomial(), &toy::LAMBDA, 1)?;
    let (u, eps, theta) = (State::from_real(&[0.3, -0.6, 0.2]), 0.07, 1.3);
    let phi = av1.phis[1].eval(eps, theta, &u, ModeConvention::Periodic)?;
    let g = av1.big_g.eval(eps, 0.0, &u, ModeConvention::Periodic)?;
    println!("|Φ^[1] - hand| = {:.1e}", (&phi - &toy_phi1(eps, theta, &u)).norm());
    println!("|G^[1] - hand| = {:.1e}", (&g - &toy_g1(eps, &u)).norm());

    // the hand-coded decomposition and the derived one give the same maps
    let (hand, auto) = (toy_decomposition(2, eps)?, auto_decomposition(2, eps)?);
    println!("|Ω² hand - auto| = {:.1e}", (&hand.omega(0.4, &u) - &auto.omega(0.4, &u)).norm());
    println!("defect residual at τ = 0.4: {:.1e}", defect_residual(&auto, &toy::problem(), 0.4, &u));
    Ok(())
}
