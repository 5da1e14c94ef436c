use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stiffscale::autoderive::{
    average, compose, compose_with, derive_averaging, lift_to_g, make_g_delta, negative_modes, next_phi, operator_t,
    relative_average, shift_map, EpsModePolyMap, Limits, ModeConvention, PolyVectorField, TermKey,
};
use stiffscale::problems::toy;
use stiffscale::state::re;
use stiffscale::{Error, State, C64};

const PER: ModeConvention = ModeConvention::Periodic;

fn probe(rng: &mut ChaCha8Rng) -> (State, f64, f64) {
    let u = State::from_real(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
    (u, rng.gen_range(0.0..1.0), rng.gen_range(0.0..6.3))
}

fn close(a: &State, b: &State) -> f64 {
    (a - b).norm()
}

#[test]
fn toy_g_matches_display() {
    let g = lift_to_g(&toy::polynomial(), &toy::LAMBDA).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mi = C64::new(0.0, -1.0);
    for _ in 0..100 {
        let (u, eps, th) = probe(&mut rng);
        let e = C64::from_polar(1.0, th);
        let (u1, u2, u3) = (u[0], u[1], u[2]);
        let hand = State(vec![mi * (-u2 + e * u2 * u3), mi * (u1 - e * u1 * u3), mi * e.conj() * (u1 * u2).powi(2)]);
        assert!(close(&g.eval(eps, th, &u, PER).unwrap(), &hand) < 1e-14);
        let avg = State(vec![mi * (-u2), mi * u1, re(0.0)]);
        assert!(close(&average(&g).eval(eps, th, &u, PER).unwrap(), &avg) < 1e-15);
    }
}

#[test]
fn lift_mode_arithmetic() {
    // f linear in the slow variables only: no modes
    let mut f = PolyVectorField::zero(2);
    f.add_term(0, re(2.0), &[1, 0]);
    let g = lift_to_g(&f, &[0, 1]).unwrap();
    assert_eq!(g.min_mode(), Some(0));
    // a constant forcing of a fast component gets mode -λ
    let mut f = PolyVectorField::zero(2);
    f.add_term(1, re(1.0), &[0, 0]);
    let g = lift_to_g(&f, &[0, 1]).unwrap();
    assert_eq!(g.min_mode(), Some(-1));
    assert!(matches!(lift_to_g(&f, &[0]), Err(Error::Dimension { .. })));
}

#[test]
fn operator_t_of_identity() {
    let g = lift_to_g(&toy::polynomial(), &toy::LAMBDA).unwrap();
    let t = operator_t(&EpsModePolyMap::identity(3), &g, None).unwrap();
    let expected = g.add_scaled(&average(&g), re(-1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let (u, eps, th) = probe(&mut rng);
        assert!(close(&t.eval(eps, th, &u, PER).unwrap(), &expected.eval(eps, th, &u, PER).unwrap()) < 1e-15);
    }
    assert_eq!(relative_average(&t), 0.0);
    assert_eq!(compose(&g, &EpsModePolyMap::identity(3), None).unwrap().term_count(), g.term_count());
}

#[test]
fn averaged_fields_give_identity_changes() {
    // g with only j = 0 modes: every Φ^[n] is the identity
    let mut f = PolyVectorField::zero(2);
    f.add_term(0, re(1.0), &[1, 0]);
    f.add_term(1, re(-1.0), &[1, 1]);
    let av = derive_averaging(&f, &[0, 1], 2).unwrap();
    let id = EpsModePolyMap::identity(2);
    let u = State::from_real(&[0.3, -0.4]);
    for p in &av.phis {
        assert_eq!(p.eval(0.5, 1.1, &u, PER).unwrap(), id.eval(0.5, 1.1, &u, PER).unwrap());
    }
}

#[test]
fn phi1_spot_value() {
    let av = derive_averaging(&toy::polynomial(), &toy::LAMBDA, 1).unwrap();
    let v = av.phis[1].eval(0.1, 0.0, &toy::initial_state(), PER).unwrap();
    let expected = State::from_real(&[0.1 - 0.1 * 0.7 * 0.05, 0.7 + 0.1 * 0.1 * 0.05, 0.05 + 0.1 * 0.0049]);
    assert!(close(&v, &expected) < 1e-15);
    assert!((v[0].re - 0.0965).abs() < 1e-15);
}

#[test]
fn defects_have_zero_average() {
    for n in 0..=2 {
        let av = derive_averaging(&toy::polynomial(), &toy::LAMBDA, n).unwrap();
        assert_eq!(av.delta.max_coef_where(|k| k.mode == 0), 0.0, "n = {n}");
        assert!(av.big_g.max_coef_where(|k| k.mode != 0) == 0.0);
    }
    // δ^[0] = ⟨g⟩ - g
    let av = derive_averaging(&toy::polynomial(), &toy::LAMBDA, 0).unwrap();
    let expected = average(&av.g).add_scaled(&av.g, re(-1.0));
    let u = State::from_real(&[0.2, 0.5, -0.3]);
    assert!(close(&av.delta.eval(0.3, 0.7, &u, PER).unwrap(), &expected.eval(0.3, 0.7, &u, PER).unwrap()) < 1e-15);
}

#[test]
fn shifted_maps_have_nonnegative_modes() {
    let id = shift_map(&EpsModePolyMap::identity(3), &toy::LAMBDA);
    assert_eq!(id.min_mode(), Some(0));
    let av = derive_averaging(&toy::polynomial(), &toy::LAMBDA, 1).unwrap();
    // the z-term e^{-iθ}(u1 u2)² of Φ^[1] lands on mode 0
    let z = &shift_map(&av.phis[1], &toy::LAMBDA).comps[2];
    let key = TermKey { mode: 0, eps_pow: 1, exps: vec![2, 2, 0] };
    assert!(z.iter().any(|(k, c)| *k == key && *c == re(1.0)));
    for n in 0..=2 {
        let av = derive_averaging(&toy::polynomial(), &toy::LAMBDA, n).unwrap();
        for m in av.phis.iter().chain([&av.delta]) {
            assert!(negative_modes(&shift_map(m, &toy::LAMBDA)).is_empty());
        }
    }
}

#[test]
fn conventions_agree_at_zero_angle() {
    let av = derive_averaging(&toy::polynomial(), &toy::LAMBDA, 2).unwrap();
    let s = shift_map(&av.phis[2], &toy::LAMBDA);
    let u = State::from_real(&[0.4, 0.1, -0.6]);
    let a = s.eval(0.2, 0.0, &u, ModeConvention::Periodic).unwrap();
    let b = s.eval(0.2, 0.0, &u, ModeConvention::Dissipative).unwrap();
    assert!(close(&a, &b) < 1e-15);
    assert!(av.phis[1].eval(0.2, 0.0, &u, ModeConvention::Dissipative).is_err());
}

#[test]
fn invariant_violations_are_hard_failures() {
    let g = lift_to_g(&toy::polynomial(), &toy::LAMBDA).unwrap();
    // a map with a θ-dependent ε⁰ term
    let mut bad = EpsModePolyMap::identity(3);
    bad.comps[0].add(TermKey { mode: 1, eps_pow: 0, exps: vec![0, 1, 0] }, re(1.0));
    assert!(matches!(make_g_delta(&bad, &g), Err(Error::Invariant(_))));
    // a change of variables without identity average makes T(φ) secular
    let mut skew = EpsModePolyMap::identity(3);
    skew.comps[0].add(TermKey { mode: 0, eps_pow: 0, exps: vec![2, 0, 0] }, re(1.0));
    let t = operator_t(&skew, &g, Some(0)).unwrap();
    assert!(relative_average(&t) > 0.0);
    assert!(matches!(next_phi(&skew, &g, 0), Err(Error::Invariant(_))));
}

#[test]
fn size_caps_are_enforced() {
    let av = derive_averaging(&toy::polynomial(), &toy::LAMBDA, 1).unwrap();
    let tight = Limits { max_terms: 5, max_degree: 16 };
    assert!(matches!(compose_with(&av.g, &av.phis[1], None, &tight), Err(Error::SizeLimit(_))));
    let shallow = Limits { max_terms: 20_000, max_degree: 3 };
    assert!(matches!(compose_with(&av.g, &av.phis[1], None, &shallow), Err(Error::SizeLimit(_))));
}

#[test]
fn term_list_round_trips() {
    let av = derive_averaging(&toy::polynomial(), &toy::LAMBDA, 2).unwrap();
    let terms = av.big_g.term_list();
    let mut rebuilt = EpsModePolyMap::zero(3);
    for t in &terms {
        rebuilt.comps[t.component]
            .add(TermKey { mode: t.mode, eps_pow: t.eps_power, exps: t.exponents.clone() }, C64::new(t.re, t.im));
    }
    let u = State::from_real(&[0.3, 0.2, 0.9]);
    assert_eq!(rebuilt.eval(0.4, 0.0, &u, PER).unwrap(), av.big_g.eval(0.4, 0.0, &u, PER).unwrap());
    let json = serde_json::to_string(&terms).unwrap();
    assert!(json.contains("\"eps_power\"") && json.contains("\"exponents\""));
}
