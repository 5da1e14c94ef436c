//! Invariant suites run by `stiffscale check`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::autoderive::{
    derive_averaging, from_averaging, negative_modes, operator_t, relative_average, shift_map, ModeConvention,
    PolyVectorField,
};
use crate::error::Result;
use crate::expkit::{integrate, ErkScheme};
use crate::micromacro::{defect_terms, Decomposition};
use crate::problem::SemilinearProblem;
use crate::problems::conservation::{conservation_decomposition, ConservationLaw};
use crate::problems::telegraph::{
    exact_mode_solution, stability_lambdas_s, telegraph_decomposition, telegraph_mode_problem, TelegraphMode,
};
use crate::problems::toy::{self, auto_decomposition, toy_decomposition};
use crate::state::{re, State, C64};

use super::case::{uniform_grid, Case};
use super::config::{ProblemBlock, ProblemKind};
use super::experiment::Gate;
use super::reference::{compute_reference, direct_trajectory, Trajectory};

/// Random probes per decomposition.
pub const PROBES: usize = 100;
pub const EXACT_TOL: f64 = 1e-10;
pub const FD_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Suite {
    pub name: String,
    pub gates: Vec<Gate>,
}

impl Suite {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.pass)
    }
}

fn real_probe(rng: &mut ChaCha8Rng, d: usize) -> State {
    State((0..d).map(|_| re(rng.gen_range(-1.0..1.0))).collect())
}

fn complex_probe(rng: &mut ChaCha8Rng, d: usize) -> State {
    State((0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
}

/// Smooth random grid data for the conservation law.
fn smooth_probe(rng: &mut ChaCha8Rng, law: &ConservationLaw) -> State {
    let n = law.n;
    let (a, ph, c) = (rng.gen_range(0.1..0.6), rng.gen_range(0.0..6.3), rng.gen_range(-0.4..0.4));
    State(
        (0..2 * n)
            .map(|i| {
                let x = (i % n) as f64 * law.dx();
                re(a * (x + ph).sin() + c * (2.0 * x).cos())
            })
            .collect(),
    )
}

/// Largest defect residual over the probes, absolute or relative to the largest term.
pub fn max_defect(d: &Decomposition, p: &SemilinearProblem, probes: &[(f64, State)], relative: bool) -> f64 {
    probes
        .iter()
        .map(|(tau, u)| {
            let t = defect_terms(d, p, *tau, u);
            if relative {
                t.relative()
            } else {
                t.residual().norm()
            }
        })
        .fold(0.0, f64::max)
}

/// Defect identities of every shipped decomposition at random probes: absolute residual with
/// exact partials, residual relative to the largest term with finite-difference partials.
pub fn defect_suite(seed: u64) -> Result<Suite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::new();
    let eps_list = [1.0, 0.1, 2f64.powi(-8), 2f64.powi(-15)];
    let p = toy::problem();
    for n in 0..=2 {
        let (mut exact, mut fd) = (0.0f64, 0.0f64);
        for &eps in &eps_list {
            let probes: Vec<_> = (0..PROBES).map(|_| (rng.gen_range(0.0..5.0), real_probe(&mut rng, 3))).collect();
            for d in [toy_decomposition(n, eps)?, auto_decomposition(n, eps)?] {
                exact = exact.max(max_defect(&d, &p, &probes, false));
                fd = fd.max(max_defect(&d.finite_difference_only(), &p, &probes, true));
            }
        }
        gates.push(Gate::at_most(format!("toy n{n} exact partials"), exact, EXACT_TOL));
        gates.push(Gate::at_most(format!("toy n{n} finite differences"), fd, FD_TOL));
    }
    for n in 0..=1 {
        let (mut exact, mut fd) = (0.0f64, 0.0f64);
        for k in 0..=12 {
            for &eps in &eps_list {
                let p = telegraph_mode_problem(k, 2.0, eps)?;
                let d = telegraph_decomposition(k, 2.0, eps, n)?;
                let probes: Vec<_> =
                    (0..PROBES).map(|_| (rng.gen_range(0.0..5.0), complex_probe(&mut rng, 2))).collect();
                exact = exact.max(max_defect(&d, &p, &probes, false));
                fd = fd.max(max_defect(&d.finite_difference_only(), &p, &probes, true));
            }
        }
        gates.push(Gate::at_most(format!("telegraph n{n} exact partials, k = 0..12"), exact, EXACT_TOL));
        gates.push(Gate::at_most(format!("telegraph n{n} finite differences, k = 0..12"), fd, FD_TOL));
    }
    let law = ConservationLaw::new(16, 0.2, false)?;
    let p = law.problem();
    for n in 0..=1 {
        let mut fd = 0.0f64;
        for &eps in &eps_list {
            let d = conservation_decomposition(&law, eps, n)?;
            let probes: Vec<_> = (0..PROBES).map(|_| (rng.gen_range(0.0..5.0), smooth_probe(&mut rng, &law))).collect();
            fd = fd.max(max_defect(&d, &p, &probes, true));
        }
        gates.push(Gate::at_most(format!("conservation n{n} finite differences"), fd, FD_TOL));
    }
    Ok(Suite { name: "defect identities".into(), gates })
}

/// Hand-written `Φ^[1]_θ(u)` of the toy problem.
pub fn toy_phi1(eps: f64, theta: f64, u: &State) -> State {
    let e = C64::from_polar(1.0, theta);
    let (u1, u2, u3) = (u[0], u[1], u[2]);
    State(vec![u1 - e * u2 * u3 * eps, u2 + e * u1 * u3 * eps, u3 + e.conj() * (u1 * u2).powi(2) * eps])
}

/// Hand-written `G^[1](u)` of the toy problem.
pub fn toy_g1(eps: f64, u: &State) -> State {
    let (u1, u2, u3) = (u[0], u[1], u[2]);
    let s = re(1.0) - (u1 * u2).powi(2) * eps;
    let mi = C64::new(0.0, -1.0);
    State(vec![mi * (-s * u2), mi * (s * u1), mi * (u1 * u2 * u3 * (u1 * u1 - u2 * u2) * (2.0 * eps))])
}

/// Hand-written `T(Φ^[1])_θ(u)` of the toy problem to first order in `eps`.
pub fn toy_t_phi1(eps: f64, theta: f64, u: &State) -> State {
    let e = C64::from_polar(1.0, theta);
    let (u1, u2, u3) = (u[0], u[1], u[2]);
    let p = u1 * u2;
    let mi = C64::new(0.0, -1.0);
    State(vec![
        mi * e * u3 * (u2 + e * u1 * u3 * eps),
        mi * (-e) * u3 * (u1 - e * u2 * u3 * eps),
        mi * e.conj() * (p * p - p * (u1 * u1 - u2 * u2) * (2.0 * eps)),
    ])
}

/// Symbolic engine against the hand-written toy formulas, zero averages and mode scans.
pub fn autoderive_suite(seed: u64) -> Result<Suite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::new();
    let av = derive_averaging(&toy::polynomial(), &toy::LAMBDA, 1)?;
    let (mut phi1, mut g1, mut t1, mut om2, mut f2, mut cm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let t_sym = operator_t(&av.phis[1], &av.g, Some(1))?;
    for _ in 0..PROBES {
        let u = real_probe(&mut rng, 3);
        let eps = rng.gen_range(0.0..1.0);
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let tau = rng.gen_range(0.0..5.0);
        let per = ModeConvention::Periodic;
        phi1 = phi1.max((&av.phis[1].eval(eps, theta, &u, per)? - &toy_phi1(eps, theta, &u)).norm());
        g1 = g1.max((&av.big_g.eval(eps, 0.0, &u, per)? - &toy_g1(eps, &u)).norm());
        t1 = t1.max((&t_sym.eval(eps, theta, &u, per)? - &toy_t_phi1(eps, theta, &u)).norm());
        let (hand, auto) = (toy_decomposition(2, eps)?, auto_decomposition(2, eps)?);
        om2 = om2.max((&hand.omega(tau, &u) - &auto.omega(tau, &u)).norm());
        f2 = f2.max((&hand.macro_field(&u) - &auto.macro_field(&u)).norm());
        // center manifold: z-component of Ω² as τ → ∞
        let p = u[0] * u[1];
        let h = p * p * eps - p * (u[0] * u[0] - u[1] * u[1]) * (2.0 * eps * eps);
        cm = cm.max((auto.omega(800.0, &State(vec![u[0], u[1], re(0.0)]))[2] - h).norm());
    }
    for (name, v) in [
        ("toy Φ^[1] vs hand-written", phi1),
        ("toy G^[1] vs hand-written", g1),
        ("toy T(Φ^[1]) to first order vs hand-written", t1),
        ("toy Ω^[2] vs hand-written", om2),
        ("toy F^[2] vs hand-written", f2),
        ("toy center manifold vs hand-written", cm),
    ] {
        gates.push(Gate::at_most(name, v, 1e-12));
    }
    let law = ConservationLaw::new(4, 0.2, false)?;
    let mut cases: Vec<(String, PolyVectorField, Vec<u32>, usize)> = (0..=2)
        .map(|n| (format!("toy n{n}"), toy::polynomial(), toy::LAMBDA.to_vec(), n))
        .collect();
    for n in 0..=1 {
        for k in [0, 1, 5, 12] {
            cases.push((format!("telegraph k{k} n{n}"), TelegraphMode::new(k, 2.0, 0.1)?.polynomial(), vec![0, 1], n));
        }
        let mut lam = vec![0; law.n];
        lam.extend(vec![1; law.n]);
        cases.push((format!("conservation N=4 n{n}"), law.polynomial(), lam, n));
    }
    for (label, poly, lam, n) in cases {
        let av = derive_averaging(&poly, &lam, n)?;
        let avg = (0..=n)
            .map(|k| operator_t(&av.phis[k], &av.g, Some(k as u32)).map(|t| relative_average(&t)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        gates.push(Gate::at_most(format!("{label}: relative average of T(Φ)"), avg, 1e-12));
        let mut neg = 0usize;
        for m in av.phis.iter().chain([&av.delta]) {
            neg += negative_modes(&shift_map(m, &lam)).len();
        }
        from_averaging(&av, &lam)?;
        gates.push(Gate::at_most(format!("{label}: negative modes in shifted maps"), neg as f64, 0.0));
    }
    Ok(Suite { name: "symbolic engine".into(), gates })
}

/// Stability constants of the regularized telegraph change of variables.
pub fn telegraph_suite() -> Result<Suite> {
    let mut gates = Vec::new();
    let scan: Vec<f64> = std::iter::once(0.0).chain((0..=1400).map(|i| 10f64.powf(-6.0 + i as f64 * 0.01))).collect();
    let mut worst: f64 = f64::INFINITY;
    for alpha in [1.0, 1.5, 2.0, 3.0, 10.0] {
        for &s in &scan {
            let (l, _) = stability_lambdas_s(s, alpha);
            // distance to the open-closed interval (1 - 1/α, 1]
            worst = worst.min((l - (1.0 - 1.0 / alpha)).min(if l <= 1.0 { f64::INFINITY } else { -1.0 }));
        }
    }
    gates.push(Gate::new("λ - (1 - 1/α) on the scan (must be > 0)", worst, Some(f64::MIN_POSITIVE), None));
    let pos = scan.iter().filter(|&&s| s >= 1e-6).map(|&s| stability_lambdas_s(s, 2.0).1).fold(f64::INFINITY, f64::min);
    gates.push(Gate::at_least("min λ̃ at α = 2, eps k² in [1e-6, 1e8]", pos, 0.0));
    let neg = scan.iter().map(|&s| stability_lambdas_s(s, 1.99).1).fold(f64::INFINITY, f64::min);
    gates.push(Gate::new("min λ̃ at α = 1.99 (must be < 0)", neg, None, Some(-f64::MIN_POSITIVE)));
    let m = TelegraphMode::new(10, 2.0, 1e-2)?;
    gates.push(Gate::band("e^{k̂²} / 3e14 at (k, α, eps) = (10, 2, 1e-2)", m.k_hat2().exp() / 3e14, 1.0, 0.05));
    Ok(Suite { name: "telegraph stability".into(), gates })
}

/// Classical RK4 on the unsplit problem.
pub fn rk4(problem: &SemilinearProblem, eps: f64, u0: &State, t_grid: &[f64], max_step: f64) -> Result<Vec<State>> {
    let mut out = vec![u0.clone()];
    let mut u = u0.clone();
    for w in t_grid.windows(2) {
        let m = ((w[1] - w[0]) / max_step).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / m as f64;
        for _ in 0..m {
            let k1 = problem.eval_rhs(eps, &u)?;
            let k2 = problem.eval_rhs(eps, &(&u + &(&k1 * (h / 2.0))))?;
            let k3 = problem.eval_rhs(eps, &(&u + &(&k2 * (h / 2.0))))?;
            let k4 = problem.eval_rhs(eps, &(&u + &(&k3 * h)))?;
            let inc = &(&(&k1 + &k4) + &(&(&k2 + &k3) * 2.0)) * (h / 6.0);
            u += &inc;
        }
        out.push(u.clone());
    }
    Ok(out)
}

fn sup_diff(a: &Trajectory, b: &[Vec<State>]) -> f64 {
    a.u.iter().zip(b).map(|(x, y)| Case::sup_distance(x, y)).fold(0.0, f64::max)
}

/// Direct ERK3 solves halved until successive solves differ by less than `tol`.
fn refined_direct(case: &Case, grid: &[f64], tol: f64) -> Result<Trajectory> {
    let scheme = ErkScheme::erk3();
    let mut h = grid[1] - grid[0];
    let mut prev = direct_trajectory(case, &scheme, grid, h)?;
    for _ in 0..16 {
        h /= 2.0;
        let cur = direct_trajectory(case, &scheme, grid, h)?;
        if sup_diff(&cur, &prev.u) < tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Ok(prev)
}

/// Cross-checks of the reference solutions against independent integrators.
pub fn reference_suite() -> Result<Suite> {
    let mut gates = Vec::new();
    let toy_block = ProblemBlock::new(ProblemKind::Toy);
    let grid = uniform_grid(1.0, 2f64.powi(-4));

    let case = Case::new(&toy_block, 1.0)?;
    let (r, _) = compute_reference(&case, &grid)?;
    let b = &case.blocks[0];
    let classical = rk4(&b.problem, 1.0, &b.u0, &grid, 2f64.powi(-12))?;
    let per: Vec<Vec<State>> = classical.into_iter().map(|u| vec![u]).collect();
    gates.push(Gate::at_most("toy eps = 1: reference vs classical RK4", sup_diff(&r, &per), 1e-10));

    let case = Case::new(&toy_block, 2f64.powi(-6))?;
    let (r, _) = compute_reference(&case, &grid)?;
    let direct = refined_direct(&case, &grid, 1e-12)?;
    gates.push(Gate::at_most("toy eps = 2^-6: micro-macro vs direct reference", sup_diff(&r, &direct.u), 1e-9));

    let (r0, _) = compute_reference(&case, &[0.0])?;
    gates.push(Gate::at_most("T = 0: reference equals the initial state", Case::sup_distance(&r0.u[0], &[case.blocks[0].u0.clone()]), 0.0));

    let mut worst: f64 = 0.0;
    for (k, eps) in [(3, 0.1), (7, 1e-3), (12, 1e-5)] {
        let m = TelegraphMode::new(k, 2.0, eps)?;
        let p = telegraph_mode_problem(k, 2.0, eps)?;
        let u0 = State(vec![C64::new(0.7, -0.2), C64::new(0.1, 0.3)]);
        let tg = uniform_grid(1.0, 2f64.powi(-3));
        // halve until successive solves differ by less than 1e-12 at the third-order rate
        let mut h = 2f64.powi(-6);
        let mut prev = integrate(&ErkScheme::erk3(), &p, eps, &u0, &tg, h)?;
        let mut last = f64::INFINITY;
        for _ in 0..13 {
            h /= 2.0;
            let cur = integrate(&ErkScheme::erk3(), &p, eps, &u0, &tg, h)?;
            let d = cur.iter().zip(&prev).map(|(a, b)| (a - b).max_abs()).fold(0.0, f64::max);
            prev = cur;
            if d < 1e-12 && (6.0..10.0).contains(&(last / d)) {
                break;
            }
            last = d;
        }
        for (t, u) in tg.iter().zip(&prev) {
            worst = worst.max((&exact_mode_solution(&m, &u0, *t) - u).max_abs());
        }
    }
    gates.push(Gate::at_most("telegraph mode: exact propagator vs refined ERK3", worst, 1e-12));
    Ok(Suite { name: "references".into(), gates })
}

/// All suites.
pub fn run_checks(seed: u64) -> Result<Vec<Suite>> {
    Ok(vec![defect_suite(seed)?, autoderive_suite(seed)?, telegraph_suite()?, reference_suite()?])
}
