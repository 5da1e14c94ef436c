use stiffscale::expkit::ErkScheme;
use stiffscale::harness::uniform_grid;
use stiffscale::micromacro::{solve_micromacro, SolveOptions};
use stiffscale::problems::conservation::{conservation_decomposition, ConservationLaw};
use stiffscale::problems::telegraph::{
    exact_mode_solution, stability_lambdas, stability_lambdas_s, telegraph_assemble, telegraph_decomposition,
    TelegraphData, TelegraphField, TelegraphMode,
};
use stiffscale::problems::toy::{self, toy_decomposition};
use stiffscale::{State, C64};

fn close(a: &State, b: &State, tol: f64) -> bool {
    (a - b).norm() <= tol
}

#[test]
fn toy_limit_without_stiffness_parameter() {
    let u = State::from_real(&[0.3, -0.8, 0.4]);
    for n in 0..=2 {
        let d = toy_decomposition(n, 0.0).unwrap();
        assert_eq!(d.omega(0.0, &u), u);
        assert_eq!(d.macro_field(&u), State::from_real(&[0.8, 0.3, 0.0]));
    }
    assert!(toy_decomposition(3, 0.1).is_err());
}

#[test]
fn toy_second_order_fast_row() {
    let (x1, x2, z, eps) = (0.3f64, -0.8f64, 0.4f64, 0.05f64);
    let d = toy_decomposition(2, eps).unwrap();
    let om = d.omega(0.0, &State::from_real(&[x1, x2, z]));
    let p = x1 * x2;
    let expected = z + eps * p * p - 2.0 * eps * eps * p * (x1 * x1 - x2 * x2);
    assert!((om[2].re - expected).abs() < 1e-15);
    let slow = x1 - eps * x2 * z - 0.5 * eps * eps * x1 * z * z;
    assert!((om[0].re - slow).abs() < 1e-15);
}

#[test]
fn telegraph_order_zero_defect() {
    let (k, alpha, eps, tau) = (3, 2.0, 0.02, 0.4f64);
    let m = TelegraphMode::new(k, alpha, eps).unwrap();
    let d = telegraph_decomposition(k, alpha, eps, 0).unwrap();
    let u = State(vec![C64::new(0.5, -0.1), C64::new(0.2, 0.3)]);
    let ik = C64::new(0.0, 3.0);
    let expected = State(vec![ik * u[1] * (-tau).exp(), ik * (m.k_hat2() * m.c()) * u[0]]);
    assert!(close(&d.eta(tau, &u), &expected, 1e-14));
    // Ω is the identity at τ = 0 for n = 0
    assert!(close(&d.omega(0.0, &u), &u, 0.0));
}

#[test]
fn telegraph_macro_flow_at_time_zero() {
    let u = State(vec![C64::new(0.5, -0.1), C64::new(0.2, 0.3)]);
    for n in 0..=1 {
        let d = telegraph_decomposition(5, 2.0, 0.01, n).unwrap();
        assert!(close(&d.exact_macro(0.0, &u).unwrap(), &u, 0.0));
    }
}

#[test]
fn telegraph_parameter_checks() {
    assert!(telegraph_decomposition(2, 1.5, 0.1, 1).is_err());
    assert!(telegraph_decomposition(2, 1.5, 0.1, 0).is_ok());
    assert!(telegraph_decomposition(2, 2.0, 0.1, 2).is_err());
    assert!(TelegraphMode::new(1, 0.5, 0.1).is_err());
    assert!(TelegraphMode::new(1, 2.0, 0.0).is_err());
}

#[test]
fn stability_constants() {
    assert_eq!(stability_lambdas(0, 2.0, 0.1), (1.0, 1.0));
    let (_, lt) = stability_lambdas_s(100.0, 1.5);
    assert!(lt < 0.0);
    // direct formula where there is no cancellation
    let m = TelegraphMode::new(4, 3.0, 0.01).unwrap();
    let kh2 = m.k_hat2();
    let (l, lt) = m.lambdas();
    assert!((l - (1.0 - m.eps * kh2)).abs() < 1e-15);
    assert!((lt - (1.0 - m.eps * kh2 * (1.0 + m.eps * kh2 * m.c()))).abs() < 1e-14);
}

#[test]
fn telegraph_initial_spectrum() {
    let field = TelegraphField::new(12, 2.0, TelegraphData::Standard);
    // modified Bessel values I_0(1), I_1(1)
    assert!((field.rho0[field.index(0)].re - 1.266_065_877_752_008_4).abs() < 1e-14);
    assert!((field.rho0[field.index(1)].re - 0.565_159_103_992_485_1).abs() < 1e-14);
    // ½cos³x = (3cos x + cos 3x)/8
    assert!((field.j0[field.index(-1)].re - 3.0 / 16.0).abs() < 1e-15);
    assert!((field.j0[field.index(3)].re - 1.0 / 16.0).abs() < 1e-15);
    assert!(field.j0[field.index(2)].norm() < 1e-15);
    assert!(field.aliasing < 1e-14);
}

#[test]
fn telegraph_synthesis() {
    let (kmax, alpha, eps) = (12, 2.0, 0.1);
    let zero = vec![State::zeros(2); 2 * kmax + 1];
    let (r, j) = telegraph_assemble(kmax, alpha, eps, &zero, 16).unwrap();
    assert!(r.iter().chain(&j).all(|&x| x == 0.0));
    let field = TelegraphField::new(kmax, alpha, TelegraphData::Standard);
    let modes: Vec<State> = field.modes().map(|k| field.initial_mode(k, eps).unwrap()).collect();
    let (r, j) = telegraph_assemble(kmax, alpha, eps, &modes, 16).unwrap();
    for (i, (ri, ji)) in r.iter().zip(&j).enumerate() {
        let x = i as f64 * std::f64::consts::PI / 8.0;
        assert!((ri - x.cos().exp()).abs() < 1e-12);
        assert!((ji - 0.5 * x.cos().powi(3)).abs() < 1e-12);
    }
}

#[test]
fn telegraph_modes_stay_conjugate() {
    let (alpha, eps) = (2.0, 0.05);
    let u = State(vec![C64::new(0.4, 0.2), C64::new(-0.1, 0.3)]);
    let uc = State(u.iter().map(|c| c.conj()).collect());
    for k in [1, 4, 9] {
        let p = exact_mode_solution(&TelegraphMode::new(k, alpha, eps).unwrap(), &u, 0.7);
        let q = exact_mode_solution(&TelegraphMode::new(-k, alpha, eps).unwrap(), &uc, 0.7);
        let pc = State(p.iter().map(|c| c.conj()).collect());
        assert!(close(&pc, &q, 1e-14));
    }
}

#[test]
fn telegraph_exact_solution_solves_the_mode() {
    let m = TelegraphMode::new(3, 2.0, 0.05).unwrap();
    let u0 = State(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.5)]);
    let (t, h) = (0.3, 1e-5);
    let a = m.system_matrix();
    let u = exact_mode_solution(&m, &u0, t);
    let du = &(&exact_mode_solution(&m, &u0, t + h) - &exact_mode_solution(&m, &u0, t - h)) * (0.5 / h);
    let au = State(vec![a[0][0] * u[0] + a[0][1] * u[1], a[1][0] * u[0] + a[1][1] * u[1]]);
    assert!((&du - &au).norm() < 1e-6 * au.norm());
    assert!(close(&exact_mode_solution(&m, &u0, 0.0), &u0, 1e-15));
}

#[test]
fn conservation_constant_states_are_equilibria() {
    let law = ConservationLaw::new(8, 0.2, false).unwrap();
    let u = State::concat(&State::from_real(&[0.7; 8]), &State::from_real(&[-0.3; 8]));
    assert!(law.f(&u).norm() < 1e-14);
    for n in 0..=1 {
        let d = conservation_decomposition(&law, 0.1, n).unwrap();
        assert!(d.eta(0.3, &u).norm() < 1e-13);
        assert!(d.macro_field(&u).norm() < 1e-13);
    }
}

#[test]
fn conservation_parameter_checks() {
    assert!(ConservationLaw::new(2, 0.2, false).is_err());
    let viscous = ConservationLaw::new(8, 0.2, true).unwrap();
    assert!(conservation_decomposition(&viscous, 0.1, 1).is_err());
    let law = ConservationLaw::new(8, 0.2, false).unwrap();
    assert!(conservation_decomposition(&law, 0.1, 2).is_err());
}

#[test]
fn regularized_difference_reduces_to_centered_difference() {
    let law = ConservationLaw::new(9, 0.2, false).unwrap();
    let m = law.d_tilde(0.0).unwrap();
    let v: Vec<C64> = law.nodes().iter().map(|x| C64::new((2.0 * x).sin(), 0.0)).collect();
    let dv = law.d(&v);
    for j in 0..9 {
        let row: f64 = (0..9).map(|l| m[j * 9 + l] * v[l].re).sum();
        assert!((row - dv[j].re).abs() < 1e-13);
    }
}

#[test]
fn conservation_mass_is_conserved() {
    let law = ConservationLaw::new(16, 0.2, false).unwrap();
    let p = law.problem();
    let u0 = law.initial_state();
    let eps = 0.01;
    let d = conservation_decomposition(&law, eps, 1).unwrap();
    let grid = uniform_grid(0.25, 1.0 / 64.0);
    let out = solve_micromacro(&d, &p, &ErkScheme::erk2(), &u0, &grid, &SolveOptions::with_step(1.0 / 64.0)).unwrap();
    let m0 = law.mass(&u0);
    let drift = out.iter().map(|q| (law.mass(&q.u) - m0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-13, "{drift:e}");
}

#[test]
fn toy_field_spot_values() {
    let u = toy::initial_state();
    let f = toy::f(&u);
    assert!(close(&f, &State::from_real(&[-0.95 * 0.7, 0.95 * 0.1, 0.0049]), 1e-16));
}
