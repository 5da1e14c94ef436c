use proptest::prelude::*;

use stiffscale::autoderive::{average, compose, derive_averaging, ModeConvention};
use stiffscale::expkit::PhiEvaluator;
use stiffscale::problems::conservation::ConservationLaw;
use stiffscale::problems::telegraph::telegraph_mode_problem;
use stiffscale::problems::toy::{self, auto_decomposition};
use stiffscale::{modified_norm, SemilinearProblem, State, C64};

fn real_state(d: usize) -> impl Strategy<Value = State> {
    prop::collection::vec(-1.0f64..1.0, d).prop_map(|v| State::from_real(&v))
}

fn complex_state(d: usize) -> impl Strategy<Value = State> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d)
        .prop_map(|v| State(v.into_iter().map(|(a, b)| C64::new(a, b)).collect()))
}

fn f_diff_gap(p: &SemilinearProblem, u: &State, d: &State) -> f64 {
    let naive = &p.f(&(u + d)) - &p.f(u);
    (&p.f_diff(u, d) - &naive).norm() / (1.0 + p.f(u).norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn modified_norm_dominates_euclidean(u in complex_state(4), eps in 1e-9f64..=1.0, lam in prop::collection::vec(0u32..4, 4)) {
        prop_assert!(modified_norm(eps, &lam, &u) >= u.norm() * (1.0 - 1e-15));
    }

    #[test]
    fn toy_f_diff_agrees(u in real_state(3), d in real_state(3)) {
        let p = toy::problem();
        prop_assert!(f_diff_gap(&p, &u, &d) <= 1e-12);
        prop_assert_eq!(p.f_diff(&u, &State::zeros(3)), State::zeros(3));
    }

    #[test]
    fn telegraph_f_diff_agrees(u in complex_state(2), d in complex_state(2), k in -12i32..=12, eps in 1e-8f64..=1.0) {
        let p = telegraph_mode_problem(k, 2.0, eps).unwrap();
        prop_assert!(f_diff_gap(&p, &u, &d) <= 1e-12);
        prop_assert_eq!(p.f_diff(&u, &State::zeros(2)), State::zeros(2));
    }

    #[test]
    fn conservation_f_diff_agrees(u in real_state(16), d in real_state(16)) {
        let p = ConservationLaw::new(8, 0.2, false).unwrap().problem();
        prop_assert!(f_diff_gap(&p, &u, &d) <= 1e-12);
        prop_assert_eq!(p.f_diff(&u, &State::zeros(16)), State::zeros(16));
    }

    #[test]
    fn phi_branches_agree_near_seam(r in 0.08f64..0.12, arg in 0.0f64..std::f64::consts::TAU) {
        let ev = PhiEvaluator::default();
        let z = C64::from_polar(r, arg);
        for k in 1..=3 {
            let (t, q) = (ev.taylor(k, z), ev.recurrence(k, z));
            prop_assert!((t - q).norm() <= 1e-12 * t.norm(), "k = {}, z = {}", k, z);
        }
    }

    #[test]
    fn composition_evaluates_pointwise(u in real_state(3), eps in 0.0f64..1.0, theta in 0.0f64..6.3) {
        let av = derive_averaging(&toy::polynomial(), &toy::LAMBDA, 1).unwrap();
        let per = ModeConvention::Periodic;
        let composed = compose(&av.g, &av.phis[1], None).unwrap().eval(eps, theta, &u, per).unwrap();
        let inner = av.phis[1].eval(eps, theta, &u, per).unwrap();
        let direct = av.g.eval(eps, theta, &inner, per).unwrap();
        prop_assert!((&composed - &direct).norm() <= 1e-12);
    }

    #[test]
    fn average_is_idempotent(eps in 0.0f64..1.0, u in real_state(3)) {
        let av = derive_averaging(&toy::polynomial(), &toy::LAMBDA, 2).unwrap();
        let once = average(&av.phis[2]);
        let twice = average(&once);
        let per = ModeConvention::Periodic;
        prop_assert_eq!(once.eval(eps, 0.3, &u, per).unwrap(), twice.eval(eps, 0.3, &u, per).unwrap());
    }

    #[test]
    fn real_states_stay_real(u in real_state(3), tau in 0.0f64..10.0, n in 0usize..=2, eps in 1e-6f64..=1.0) {
        let d = auto_decomposition(n, eps).unwrap();
        for s in [d.omega(tau, &u), d.eta(tau, &u), d.macro_field(&u)] {
            prop_assert!(s.max_imag() <= 1e-12);
        }
    }

    #[test]
    fn rhs_is_linear_in_stiff_part(u in real_state(3), eps in 1e-6f64..=1.0) {
        let p = toy::problem();
        let rhs = p.eval_rhs(eps, &u).unwrap();
        let f = p.f(&u);
        prop_assert_eq!(rhs[0], f[0]);
        prop_assert!((rhs[2] - (f[2] - u[2] / eps)).norm() <= 1e-12 * (1.0 + u[2].norm() / eps));
    }
}
