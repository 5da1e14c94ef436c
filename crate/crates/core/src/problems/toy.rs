//! Oscillating toy problem
//!
//! ```text
//! x' = (1 - z) J x,      J = [[0, -1], [1, 0]]
//! z' = -z/eps + (x1 x2)^2
//! ```

use std::sync::{Arc, OnceLock};

use crate::autoderive::{derive_decomposition, DissipativeSet, ModeConvention, PolyVectorField};
use crate::error::{Error, Result};
use crate::micromacro::{Decomposition, DissipativeMaps};
use crate::problem::SemilinearProblem;
use crate::state::{re, State, C64};

pub const X0: [f64; 2] = [0.1, 0.7];
pub const Z0: f64 = 0.05;
pub const T_END: f64 = 1.0;
pub const LAMBDA: [u32; 3] = [0, 0, 1];

/// Default initial state `(x0, z0)`.
pub fn initial_state() -> State {
    State::from_real(&[X0[0], X0[1], Z0])
}

/// Near-equilibrium variant with `z0 = 0`.
pub fn initial_state_equilibrium() -> State {
    State::from_real(&[X0[0], X0[1], 0.0])
}

/// `f` as a polynomial field.
pub fn polynomial() -> PolyVectorField {
    let mut p = PolyVectorField::zero(3);
    p.add_term(0, re(-1.0), &[0, 1, 0]).add_term(0, re(1.0), &[0, 1, 1]);
    p.add_term(1, re(1.0), &[1, 0, 0]).add_term(1, re(-1.0), &[1, 0, 1]);
    p.add_term(2, re(1.0), &[2, 2, 0]);
    p
}

pub fn f(u: &State) -> State {
    let (x1, x2, z) = (u[0], u[1], u[2]);
    let one = re(1.0);
    let p = x1 * x2;
    State(vec![-(one - z) * x2, (one - z) * x1, p * p])
}

/// `f(x + a, z + c) - f(x, z)` in expanded form.
pub fn f_diff(base: &State, inc: &State) -> State {
    let (x1, x2, z) = (base[0], base[1], base[2]);
    let (a1, a2, c) = (inc[0], inc[1], inc[2]);
    let one = re(1.0);
    State(vec![
        -(one - z) * a2 + (x2 + a2) * c,
        (one - z) * a1 - (x1 + a1) * c,
        (x1 * x2 + (x1 + a1) * (x2 + a2)) * (x1 * a2 + a1 * x2 + a1 * a2),
    ])
}

pub fn problem() -> SemilinearProblem {
    SemilinearProblem::new("toy", 2, LAMBDA.to_vec(), Arc::new(f), Arc::new(f_diff))
        .and_then(|p| p.with_polynomial(polynomial()))
        .expect("toy problem is well formed")
}

fn autoderived(n: usize) -> Result<Arc<DissipativeSet>> {
    static CACHE: [OnceLock<std::result::Result<Arc<DissipativeSet>, Error>>; 3] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CACHE[n]
        .get_or_init(|| derive_decomposition(&polynomial(), &LAMBDA, n).map(Arc::new))
        .clone()
}

/// Symbolic decomposition of order `n` produced by the averaging engine.
pub fn auto_decomposition(n: usize, eps: f64) -> Result<Decomposition> {
    if n > 2 {
        return Err(Error::InvalidParameter(format!("toy decompositions exist for n <= 2, got {n}")));
    }
    Ok(Decomposition::new(autoderived(n)?.at_eps(eps), format!("toy-auto-{n}")))
}

/// Hand-coded decomposition of order `n ≤ 2`; the order-2 defect is taken from the
/// averaging engine.
#[derive(Debug, Clone)]
pub struct ToyMaps {
    n: usize,
    eps: f64,
    eta2: Option<Arc<DissipativeSet>>,
}

pub fn toy_decomposition(n: usize, eps: f64) -> Result<Decomposition> {
    if n > 2 {
        return Err(Error::InvalidParameter(format!("toy decompositions exist for n <= 2, got {n}")));
    }
    let eta2 = if n == 2 { Some(autoderived(2)?) } else { None };
    Ok(Decomposition::new(ToyMaps { n, eps, eta2 }, format!("toy-{n}")))
}

impl ToyMaps {
    // ε-coefficients active at this order
    fn e1(&self) -> f64 {
        if self.n >= 1 {
            self.eps
        } else {
            0.0
        }
    }

    fn e2(&self) -> f64 {
        if self.n >= 2 {
            self.eps * self.eps
        } else {
            0.0
        }
    }

    fn omega_k(&self, k: usize, tau: f64, u: &State) -> State {
        let e1 = if k >= 1 { self.eps } else { 0.0 };
        let e2 = if k >= 2 { self.eps * self.eps } else { 0.0 };
        let (x1, x2, z) = (u[0], u[1], u[2]);
        let x = (-tau).exp();
        let p = x1 * x2;
        let q = x1 * x1 - x2 * x2;
        let xz = z * x;
        State(vec![
            x1 - x2 * xz * e1 - x1 * xz * xz * (0.5 * e2),
            x2 + x1 * xz * e1 - x2 * xz * xz * (0.5 * e2),
            xz + p * p * e1 - p * q * (2.0 * e2),
        ])
    }
}

impl DissipativeMaps for ToyMaps {
    fn order(&self) -> usize {
        self.n
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn lambda(&self) -> &[u32] {
        &LAMBDA
    }

    fn omega(&self, tau: f64, u: &State) -> State {
        self.omega_k(self.n, tau, u)
    }

    fn macro_field(&self, u: &State) -> State {
        let (x1, x2, z) = (u[0], u[1], u[2]);
        let p = x1 * x2;
        let q = x1 * x1 - x2 * x2;
        let s = re(1.0) - p * p * self.e1() + p * q * (2.0 * self.e2());
        State(vec![-x2 * s, x1 * s, z * p * q * (2.0 * self.e1())])
    }

    fn eta(&self, tau: f64, u: &State) -> State {
        let (x1, x2, z) = (u[0], u[1], u[2]);
        let x = (-tau).exp();
        let p = x1 * x2;
        match self.n {
            0 => State(vec![-x2 * z * x, x1 * z * x, -p * p]),
            1 => {
                let e = self.eps;
                let q = x1 * x1 - x2 * x2;
                let xz = z * x;
                State(vec![
                    -x1 * xz * xz * e - x2 * p * q * xz * (2.0 * e * e),
                    -x2 * xz * xz * e + x1 * p * q * xz * (2.0 * e * e),
                    p * q * (2.0 * e) - p * p * p * q * (2.0 * e * e)
                        - xz * xz * (x1.powi(4) - p * p * 4.0 + x2.powi(4)) * (e * e)
                        + xz * xz * xz * p * q * (2.0 * e.powi(3))
                        - xz.powi(4) * p * p * e.powi(4),
                ])
            }
            _ => {
                let set = self.eta2.as_ref().expect("order-2 defect is attached");
                set.delta
                    .eval(self.eps, tau, u, ModeConvention::Dissipative)
                    .expect("validated at derivation")
                    .scale(C64::new(0.0, 1.0))
            }
        }
    }

    fn shift_phi(&self, k: usize, u: &State) -> State {
        assert!(k >= 1 && k <= self.n, "shift_phi order {k} out of range");
        &self.omega_k(k, 0.0, u) - u
    }

    fn omega_dtau(&self, tau: f64, u: &State) -> Option<State> {
        let (x1, x2, z) = (u[0], u[1], u[2]);
        let xz = z * (-tau).exp();
        let (e1, e2) = (self.e1(), self.e2());
        Some(State(vec![
            x2 * xz * e1 + x1 * xz * xz * e2,
            -x1 * xz * e1 + x2 * xz * xz * e2,
            -xz,
        ]))
    }

    fn omega_jvp(&self, tau: f64, u: &State, v: &State) -> Option<State> {
        let (x1, x2, z) = (u[0], u[1], u[2]);
        let (a1, a2, c) = (v[0], v[1], v[2]);
        let x = (-tau).exp();
        let (e1, e2) = (self.e1(), self.e2());
        let p = x1 * x2;
        let q = x1 * x1 - x2 * x2;
        let dp = a1 * x2 + x1 * a2;
        let dq = (x1 * a1 - x2 * a2) * 2.0;
        let x2f = x * x;
        Some(State(vec![
            a1 - (a2 * z + x2 * c) * (x * e1) - (z * c * x1 * 2.0 + z * z * a1) * (0.5 * e2 * x2f),
            a2 + (a1 * z + x1 * c) * (x * e1) - (z * c * x2 * 2.0 + z * z * a2) * (0.5 * e2 * x2f),
            c * x + p * dp * (2.0 * e1) - (dp * q + p * dq) * (2.0 * e2),
        ]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_eps_limit() {
        let d = toy_decomposition(2, 0.0).unwrap();
        let u = State::from_real(&[0.3, -0.4, 0.2]);
        assert_eq!(d.omega(0.0, &u), u);
        assert_eq!(d.macro_field(&u), State::from_real(&[0.4, 0.3, 0.0]));
    }

    #[test]
    fn f_diff_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let b = State::from_real(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            let i = State::from_real(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            let naive = &f(&(&b + &i)) - &f(&b);
            assert!((&f_diff(&b, &i) - &naive).norm() <= 1e-12 * (1.0 + f(&b).norm()));
            assert_eq!(f_diff(&b, &State::zeros(3)), State::zeros(3));
        }
    }

    #[test]
    fn polynomial_matches_closure() {
        let p = polynomial();
        let u = State::from_real(&[0.2, 0.9, -0.3]);
        assert!((&p.eval(&u) - &f(&u)).norm() < 1e-15);
    }
}
