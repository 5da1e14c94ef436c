//! Relaxed conservation law on a periodic grid of `N` points, written as
//!
//! ```text
//! ρ' = -D(z + g(ρ))
//! z' = -z/eps + g'(ρ) Dz - T(ρ),     T(ρ) = Dρ - g'(ρ) D g(ρ),     g(u) = b u²
//! ```
//!
//! with `D` the centered difference. The upwind variant adds `(Δx/2) L` terms.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::autoderive::PolyVectorField;
use crate::error::{Error, Result};
use crate::micromacro::{Decomposition, DissipativeMaps};
use crate::problem::SemilinearProblem;
use crate::state::{re, State, C64};

pub const DEFAULT_N: usize = 16;
pub const DEFAULT_B: f64 = 0.2;
pub const T_END: f64 = 0.25;

type Vector = Vec<C64>;

fn add(a: &[C64], b: &[C64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[C64], b: &[C64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn hadamard(a: &[C64], b: &[C64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn scaled(a: &[C64], s: f64) -> Vector {
    a.iter().map(|x| x * s).collect()
}

/// Grid operators and data of the conservation law.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservationLaw {
    pub n: usize,
    pub b: f64,
    pub include_viscosity: bool,
}

impl ConservationLaw {
    pub fn new(n: usize, b: f64, include_viscosity: bool) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("need at least 3 grid points, got {n}")));
        }
        if !b.is_finite() {
            return Err(Error::InvalidParameter("b must be finite".into()));
        }
        Ok(ConservationLaw { n, b, include_viscosity })
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| i as f64 * self.dx()).collect()
    }

    /// Centered difference `(v_{j+1} - v_{j-1}) / (2Δx)`.
    pub fn d(&self, v: &[C64]) -> Vector {
        let n = self.n;
        let s = 0.5 / self.dx();
        (0..n).map(|j| (v[(j + 1) % n] - v[(j + n - 1) % n]) * s).collect()
    }

    /// Discrete Laplacian `(v_{j+1} - 2v_j + v_{j-1}) / Δx²`.
    pub fn lap(&self, v: &[C64]) -> Vector {
        let n = self.n;
        let s = 1.0 / (self.dx() * self.dx());
        (0..n).map(|j| (v[(j + 1) % n] - v[j] * 2.0 + v[(j + n - 1) % n]) * s).collect()
    }

    pub fn g(&self, v: &[C64]) -> Vector {
        v.iter().map(|x| x * x * self.b).collect()
    }

    pub fn gp(&self, v: &[C64]) -> Vector {
        v.iter().map(|x| x * (2.0 * self.b)).collect()
    }

    /// `g''(a, c) = 2b a∘c`
    pub fn gpp(&self, a: &[C64], c: &[C64]) -> Vector {
        scaled(&hadamard(a, c), 2.0 * self.b)
    }

    /// `T(ρ) = Dρ - g'(ρ) D g(ρ)`
    pub fn t_op(&self, rho: &[C64]) -> Vector {
        sub(&self.d(rho), &hadamard(&self.gp(rho), &self.d(&self.g(rho))))
    }

    /// `T'(ρ) h = Dh - g''(h, D g(ρ)) - g'(ρ) D(g'(ρ) h)`
    pub fn t_prime(&self, rho: &[C64], h: &[C64]) -> Vector {
        let a = self.gpp(h, &self.d(&self.g(rho)));
        let gp = self.gp(rho);
        let c = hadamard(&gp, &self.d(&hadamard(&gp, h)));
        sub(&sub(&self.d(h), &a), &c)
    }

    /// `g(ρ + a) - g(ρ) = b a∘(2ρ + a)`
    fn g_diff(&self, rho: &[C64], a: &[C64]) -> Vector {
        a.iter().zip(rho).map(|(x, r)| x * (r * 2.0 + x) * self.b).collect()
    }

    /// `T(ρ + a) - T(ρ)`
    fn t_diff(&self, rho: &[C64], a: &[C64]) -> Vector {
        let p = add(rho, a);
        // g'(P) Dg(P) - g'(ρ) Dg(ρ) = (g'(P) - g'(ρ)) Dg(P) + g'(ρ) D(g(P) - g(ρ))
        let first = hadamard(&self.gp(a), &self.d(&self.g(&p)));
        let second = hadamard(&self.gp(rho), &self.d(&self.g_diff(rho, a)));
        sub(&self.d(a), &add(&first, &second))
    }

    pub fn f(&self, u: &State) -> State {
        let (rho, z) = u.split_at(self.n);
        let mut f1: Vector = self.d(&add(&z, &self.g(&rho))).iter().map(|x| -x).collect();
        let mut f2 = sub(&hadamard(&self.gp(&rho), &self.d(&z)), &self.t_op(&rho));
        if self.include_viscosity {
            let half = 0.5 * self.dx();
            let lr = self.lap(&rho);
            f1 = add(&f1, &scaled(&lr, half));
            let lu = self.lap(&add(&z, &self.g(&rho)));
            f2 = add(&f2, &scaled(&sub(&lu, &hadamard(&self.gp(&rho), &lr)), half));
        }
        State::concat(&State(f1), &State(f2))
    }

    pub fn f_diff(&self, base: &State, inc: &State) -> State {
        let (rho, z) = base.split_at(self.n);
        let (a, c) = inc.split_at(self.n);
        let gd = self.g_diff(&rho, &a);
        let mut f1: Vector = self.d(&add(&c, &gd)).iter().map(|x| -x).collect();
        // g'(ρ+a) D(z+c) - g'(ρ) Dz = g'(a) D(z+c) + g'(ρ) Dc
        let zc = add(&z, &c);
        let tr = add(&hadamard(&self.gp(&a), &self.d(&zc)), &hadamard(&self.gp(&rho), &self.d(&c)));
        let mut f2 = sub(&tr, &self.t_diff(&rho, &a));
        if self.include_viscosity {
            let half = 0.5 * self.dx();
            let la = self.lap(&a);
            f1 = add(&f1, &scaled(&la, half));
            // L(c + g-diff) - [g'(ρ+a) L(ρ+a) - g'(ρ) Lρ]
            let lr = self.lap(&rho);
            let gl = add(&hadamard(&self.gp(&a), &add(&lr, &la)), &hadamard(&self.gp(&rho), &la));
            f2 = add(&f2, &scaled(&sub(&self.lap(&add(&c, &gd)), &gl), half));
        }
        State::concat(&State(f1), &State(f2))
    }

    /// `f` as a polynomial field (used by the symbolic engine on small grids).
    pub fn polynomial(&self) -> PolyVectorField {
        let n = self.n;
        let dim = 2 * n;
        let mut p = PolyVectorField::zero(dim);
        let s = 0.5 / self.dx();
        let b = self.b;
        let e = |pairs: &[(usize, u8)]| {
            let mut v = vec![0u8; dim];
            for &(i, a) in pairs {
                v[i] += a;
            }
            v
        };
        for i in 0..n {
            let ip = (i + 1) % n;
            let im = (i + n - 1) % n;
            let (zi, zp, zm) = (n + i, n + ip, n + im);
            // ρ row: -(Dz)_i - b(Dρ²)_i
            p.add_term(i, re(-s), &e(&[(zp, 1)]));
            p.add_term(i, re(s), &e(&[(zm, 1)]));
            p.add_term(i, re(-s * b), &e(&[(ip, 2)]));
            p.add_term(i, re(s * b), &e(&[(im, 2)]));
            // z row: 2bρ_i(Dz)_i - (Dρ)_i + 2b² ρ_i (Dρ²)_i
            p.add_term(zi, re(2.0 * b * s), &e(&[(i, 1), (zp, 1)]));
            p.add_term(zi, re(-2.0 * b * s), &e(&[(i, 1), (zm, 1)]));
            p.add_term(zi, re(-s), &e(&[(ip, 1)]));
            p.add_term(zi, re(s), &e(&[(im, 1)]));
            p.add_term(zi, re(2.0 * b * b * s), &e(&[(i, 1), (ip, 2)]));
            p.add_term(zi, re(-2.0 * b * b * s), &e(&[(i, 1), (im, 2)]));
            if self.include_viscosity {
                let h = 0.5 * self.dx() / (self.dx() * self.dx());
                for (k, w) in [(ip, 1.0), (i, -2.0), (im, 1.0)] {
                    p.add_term(i, re(h * w), &e(&[(k, 1)]));
                    p.add_term(zi, re(h * w), &e(&[(n + k, 1)]));
                    p.add_term(zi, re(h * w * b), &e(&[(k, 2)]));
                    p.add_term(zi, re(-2.0 * b * h * w), &e(&[(i, 1), (k, 1)]));
                }
            }
        }
        p
    }

    pub fn problem(&self) -> SemilinearProblem {
        let mut lambda = vec![0u32; self.n];
        lambda.extend(std::iter::repeat_n(1, self.n));
        let a = self.clone();
        let b = self.clone();
        SemilinearProblem::new(
            format!("conservation-N{}", self.n),
            self.n,
            lambda,
            Arc::new(move |u| a.f(u)),
            Arc::new(move |x, y| b.f_diff(x, y)),
        )
        .expect("conservation problem is well formed")
    }

    /// `ρ0 = ½ e^{sin x}`, `z0 = cos x - g(ρ0)`.
    pub fn initial_state(&self) -> State {
        let rho: Vector = self.nodes().iter().map(|x| re(0.5 * x.sin().exp())).collect();
        let ut: Vector = self.nodes().iter().map(|x| re(x.cos())).collect();
        let z = sub(&ut, &self.g(&rho));
        State::concat(&State(rho), &State(z))
    }

    /// `Σ ρ_j Δx`
    pub fn mass(&self, u: &State) -> f64 {
        u[..self.n].iter().map(|x| x.re).sum::<f64>() * self.dx()
    }

    /// Largest `|g'(ρ_j)|`; the relaxation is stable when this is below 1.
    pub fn max_gp(&self, u: &State) -> f64 {
        self.gp(&u[..self.n]).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Discrete `H¹` norm of both blocks, the `z` block scaled by `z_scale`.
    pub fn h1_norm_scaled(&self, e: &State, z_scale: f64) -> f64 {
        let (r, z) = e.split_at(self.n);
        let z = scaled(&z, z_scale);
        let dx = self.dx();
        let block = |v: &[C64]| {
            let dv = self.d(v);
            v.iter().chain(dv.iter()).map(|x| x.norm_sqr()).sum::<f64>() * dx
        };
        (block(&r) + block(&z)).sqrt()
    }

    pub fn h1_norm(&self, e: &State) -> f64 {
        self.h1_norm_scaled(e, 1.0)
    }

    /// `H¹` norm with the fast block scaled by `1 + 1/eps`, as in the modified norm.
    pub fn h1_modified_norm(&self, eps: f64, e: &State) -> f64 {
        self.h1_norm_scaled(e, 1.0 + 1.0 / eps)
    }

    /// Dense `D̃ = (I - 2 eps D²)^{-1} D`, row major.
    pub fn d_tilde(&self, eps: f64) -> Result<Vec<f64>> {
        let n = self.n;
        let dx = self.dx();
        let mut symbol = Vec::with_capacity(n);
        for k in 0..n {
            let s = (k as f64 * dx).sin() / dx;
            let den = 1.0 + 2.0 * eps * s * s;
            if !(den >= 1.0) {
                return Err(Error::InvalidParameter("I - 2 eps D² is singular".into()));
            }
            symbol.push(C64::new(0.0, s / den));
        }
        let mut m = vec![0.0; n * n];
        for j in 0..n {
            for l in 0..n {
                let off = (j + n - l) % n;
                let v: C64 = symbol
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * C64::from_polar(1.0, k as f64 * off as f64 * dx))
                    .sum();
                m[j * n + l] = v.re / n as f64;
            }
        }
        Ok(m)
    }
}

pub fn conservation_problem(n: usize, b: f64, include_viscosity: bool) -> Result<SemilinearProblem> {
    Ok(ConservationLaw::new(n, b, include_viscosity)?.problem())
}

/// Decomposition of order 0 or 1 with the regularized `D̃`.
#[derive(Debug, Clone)]
pub struct ConservationMaps {
    law: ConservationLaw,
    eps: f64,
    order: usize,
    d_tilde: Vec<f64>,
    lambda: Vec<u32>,
}

pub fn conservation_decomposition(law: &ConservationLaw, eps: f64, n: usize) -> Result<Decomposition> {
    if n > 1 {
        return Err(Error::InvalidParameter(format!("conservation decompositions exist for n <= 1, got {n}")));
    }
    if law.include_viscosity {
        return Err(Error::InvalidParameter(
            "decompositions are derived for the system without viscosity".into(),
        ));
    }
    let mut lambda = vec![0u32; law.n];
    lambda.extend(std::iter::repeat_n(1, law.n));
    let maps = ConservationMaps { law: law.clone(), eps, order: n, d_tilde: law.d_tilde(eps)?, lambda };
    Ok(Decomposition::new(maps, format!("conservation-{n}")))
}

impl ConservationMaps {
    fn apply_dt(&self, v: &[C64]) -> Vector {
        let n = self.law.n;
        (0..n)
            .map(|j| self.d_tilde[j * n..(j + 1) * n].iter().zip(v).map(|(a, x)| x * a).sum())
            .collect()
    }

    /// `g'(ρ)Dw - eps T'(ρ)D̃w - eps² g''(D̃w, DT(ρ))`
    fn z_transport(&self, rho: &[C64], w: &[C64]) -> Vector {
        let law = &self.law;
        let e = self.eps;
        let dtw = self.apply_dt(w);
        let dt_rho = law.d(&law.t_op(rho));
        let a = hadamard(&law.gp(rho), &law.d(w));
        let b = scaled(&law.t_prime(rho, &dtw), e);
        let c = scaled(&law.gpp(&dtw, &dt_rho), e * e);
        sub(&sub(&a, &b), &c)
    }
}

impl DissipativeMaps for ConservationMaps {
    fn order(&self) -> usize {
        self.order
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn lambda(&self) -> &[u32] {
        &self.lambda
    }

    fn omega(&self, tau: f64, u: &State) -> State {
        let (rho, z) = u.split_at(self.law.n);
        let zz = scaled(&z, (-tau).exp());
        if self.order == 0 {
            return State::concat(&rho, &State(zz));
        }
        let e = self.eps;
        let r = add(&rho, &scaled(&self.apply_dt(&zz), e));
        let s = sub(&zz, &scaled(&self.law.t_op(&rho), e));
        State::concat(&State(r), &State(s))
    }

    fn macro_field(&self, u: &State) -> State {
        let law = &self.law;
        let (rho, z) = u.split_at(law.n);
        let dg: Vector = law.d(&law.g(&rho)).iter().map(|x| -x).collect();
        if self.order == 0 {
            return State::concat(&State(dg), &State(hadamard(&law.gp(&rho), &law.d(&z))));
        }
        let r = add(&dg, &scaled(&law.d(&law.t_op(&rho)), self.eps));
        State::concat(&State(r), &State(self.z_transport(&rho, &z)))
    }

    fn eta(&self, tau: f64, u: &State) -> State {
        let law = &self.law;
        let (rho, z) = u.split_at(law.n);
        let zz = scaled(&z, (-tau).exp());
        if self.order == 0 {
            return State::concat(&State(law.d(&zz)), &State(law.t_op(&rho)));
        }
        let e = self.eps;
        let dtz = self.apply_dt(&zz);
        let a = scaled(&dtz, e);
        let p = add(&rho, &a);
        let dz = law.d(&zz);
        // ρ-row: D(g(P) - g(ρ)) + (D - D̃)Z + eps D̃[g'(ρ)DZ - eps T'(ρ)D̃Z - eps² g''(D̃Z, DT(ρ))]
        let x1 = law.d(&law.g_diff(&rho, &a));
        let x2 = sub(&dz, &dtz);
        let x3 = scaled(&self.apply_dt(&self.z_transport(&rho, &zz)), e);
        let ex = add(&add(&x1, &x2), &x3);
        // z-row
        let tp_dtz = law.t_prime(&rho, &dtz);
        let dt_rho = law.d(&law.t_op(&rho));
        let z1: Vector = hadamard(&law.gp(&a), &dz).iter().map(|x| -x).collect();
        let z2 = sub(&law.t_diff(&rho, &a), &scaled(&tp_dtz, e));
        let z3 = sub(
            &scaled(&hadamard(&law.gp(&p), &dt_rho), e),
            &scaled(&law.gpp(&dtz, &dt_rho), e * e),
        );
        let macro_rho = sub(&law.d(&law.g(&rho)), &scaled(&dt_rho, e));
        let z4 = scaled(&law.t_prime(&rho, &macro_rho), e);
        let ez = add(&add(&z1, &z2), &add(&z3, &z4));
        State::concat(&State(ex), &State(ez))
    }

    fn shift_phi(&self, k: usize, u: &State) -> State {
        assert!(k >= 1 && k <= self.order, "shift_phi order {k} out of range");
        &self.omega(0.0, u) - u
    }
}
