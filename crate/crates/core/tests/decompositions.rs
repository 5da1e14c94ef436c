use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stiffscale::micromacro::{defect_terms, Decomposition};
use stiffscale::problems::conservation::{conservation_decomposition, ConservationLaw};
use stiffscale::problems::telegraph::{telegraph_decomposition, telegraph_mode_problem};
use stiffscale::problems::toy::{self, auto_decomposition, toy_decomposition};
use stiffscale::{SemilinearProblem, State, C64};

fn real_probe(rng: &mut ChaCha8Rng, d: usize, r: f64) -> State {
    State((0..d).map(|_| C64::new(rng.gen_range(-r..r), 0.0)).collect())
}

fn complex_probe(rng: &mut ChaCha8Rng, d: usize) -> State {
    State((0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
}

fn max_defect(d: &Decomposition, p: &SemilinearProblem, probes: &[(f64, State)], relative: bool) -> f64 {
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

fn toy_probes(seed: u64) -> Vec<(f64, State)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..100).map(|_| (rng.gen_range(0.0..5.0), real_probe(&mut rng, 3, 1.0))).collect()
}

#[test]
fn toy_defect_identity_exact_partials() {
    let p = toy::problem();
    for n in 0..=2 {
        for eps in [1.0, 0.1, 2f64.powi(-8)] {
            for d in [toy_decomposition(n, eps).unwrap(), auto_decomposition(n, eps).unwrap()] {
                assert!(d.has_exact_partials());
                let r = max_defect(&d, &p, &toy_probes(n as u64), false);
                assert!(r <= 1e-10, "{} eps={eps}: {r:e}", d.label());
            }
        }
    }
}

#[test]
fn toy_defect_identity_finite_differences() {
    let p = toy::problem();
    for n in 0..=2 {
        let d = toy_decomposition(n, 0.1).unwrap().finite_difference_only();
        assert!(!d.has_exact_partials());
        let r = max_defect(&d, &p, &toy_probes(10 + n as u64), true);
        assert!(r <= 1e-5, "n={n}: {r:e}");
    }
}

#[test]
fn toy_hand_coded_equals_autoderived() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for n in 0..=2 {
        let eps = 0.3;
        let a = toy_decomposition(n, eps).unwrap();
        let b = auto_decomposition(n, eps).unwrap();
        for _ in 0..100 {
            let u = real_probe(&mut rng, 3, 1.0);
            let tau = rng.gen_range(0.0..4.0);
            assert!((&a.omega(tau, &u) - &b.omega(tau, &u)).norm() < 1e-12, "omega n={n}");
            assert!((&a.macro_field(&u) - &b.macro_field(&u)).norm() < 1e-12, "F n={n}");
            assert!((&a.eta(tau, &u) - &b.eta(tau, &u)).norm() < 1e-12, "eta n={n}");
            for k in 1..=n {
                assert!((&a.shift_phi(k, &u) - &b.shift_phi(k, &u)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn telegraph_defect_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 0..=1 {
        for k in 0..=12 {
            for eps in [1.0, 0.05, 1e-4] {
                let p = telegraph_mode_problem(k, 2.0, eps).unwrap();
                let d = telegraph_decomposition(k, 2.0, eps, n).unwrap();
                let probes: Vec<(f64, State)> =
                    (0..100).map(|_| (rng.gen_range(0.0..3.0), complex_probe(&mut rng, 2))).collect();
                let r = max_defect(&d, &p, &probes, false);
                assert!(r <= 1e-10, "k={k} n={n} eps={eps}: {r:e}");
                let r = max_defect(&d.finite_difference_only(), &p, &probes, true);
                assert!(r <= 1e-5, "fd k={k} n={n} eps={eps}: {r:e}");
            }
        }
    }
}

#[test]
fn conservation_defect_identity() {
    let law = ConservationLaw::new(16, 0.2, false).unwrap();
    let p = law.problem();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 0..=1 {
        for eps in [1.0, 0.1, 2f64.powi(-10)] {
            let d = conservation_decomposition(&law, eps, n).unwrap();
            let probes: Vec<(f64, State)> = (0..100)
                .map(|_| {
                    let a = rng.gen_range(0.1..0.6);
                    let ph = rng.gen_range(0.0..6.0);
                    let u: Vec<C64> = (0..32)
                        .map(|i| {
                            let x = (i % 16) as f64 * law.dx();
                            C64::new(a * (x + ph).sin() + 0.3 * (2.0 * x).cos(), 0.0)
                        })
                        .collect();
                    (rng.gen_range(0.0..3.0), State(u))
                })
                .collect();
            let r = max_defect(&d, &p, &probes, true);
            assert!(r <= 1e-5, "n={n} eps={eps}: {r:e}");
        }
    }
}
