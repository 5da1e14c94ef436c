//! Telegraph equation in Fourier variables.
//!
//! Per frequency `k`, with `z_k = j_k + ik/(1 + α eps k²) ρ_k`, the mode `u = (ρ, z)` solves
//! `u' = -(1/eps) Λ u + f(u)` with `Λ = diag(0, 1)` and
//!
//! ```text
//! f(ρ, z) = ( -k̂² ρ - ik z,  k̂² z - ik k̂² (α + Î) ρ ),   Î = 1/(1 + α eps k²),  k̂² = k² Î.
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use crate::autoderive::PolyVectorField;
use crate::error::{Error, Result};
use crate::micromacro::{Decomposition, DissipativeMaps};
use crate::problem::SemilinearProblem;
use crate::state::{re, State, C64};

pub const LAMBDA: [u32; 2] = [0, 1];
pub const DEFAULT_ALPHA: f64 = 2.0;
pub const DEFAULT_KMAX: usize = 12;

/// Derived constants of one Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelegraphMode {
    pub k: i32,
    pub alpha: f64,
    pub eps: f64,
}

impl TelegraphMode {
    pub fn new(k: i32, alpha: f64, eps: f64) -> Result<Self> {
        if !(alpha >= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 1, got {alpha}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        Ok(TelegraphMode { k, alpha, eps })
    }

    pub fn kf(&self) -> f64 {
        self.k as f64
    }

    /// `Î = 1/(1 + α eps k²)`
    pub fn i_hat(&self) -> f64 {
        1.0 / (1.0 + self.alpha * self.eps * self.kf() * self.kf())
    }

    /// `k̂² = k²/(1 + α eps k²)`
    pub fn k_hat2(&self) -> f64 {
        self.kf() * self.kf() * self.i_hat()
    }

    /// `α + Î`
    pub fn c(&self) -> f64 {
        self.alpha + self.i_hat()
    }

    fn ik(&self) -> C64 {
        C64::new(0.0, self.kf())
    }

    /// `f` of this mode.
    pub fn f(&self, u: &State) -> State {
        let kh2 = self.k_hat2();
        let ik = self.ik();
        State(vec![-u[0] * kh2 - ik * u[1], u[1] * kh2 - ik * (kh2 * self.c()) * u[0]])
    }

    /// `f` as a polynomial field, with the `eps`-dependent coefficients frozen.
    pub fn polynomial(&self) -> PolyVectorField {
        let (kh2, ik) = (self.k_hat2(), self.ik());
        let mut p = PolyVectorField::zero(2);
        p.add_term(0, re(-kh2), &[1, 0]);
        p.add_term(0, -ik, &[0, 1]);
        p.add_term(1, re(kh2), &[0, 1]);
        p.add_term(1, -ik * (kh2 * self.c()), &[1, 0]);
        p
    }

    /// Matrix of the full linear system `-(1/eps)Λ + ∇f`, row major.
    pub fn system_matrix(&self) -> [[C64; 2]; 2] {
        let kh2 = self.k_hat2();
        [
            [re(-kh2), -self.ik()],
            [-self.ik() * (kh2 * self.c()), re(kh2 - 1.0 / self.eps)],
        ]
    }

    /// `(λ, λ̃)` of this mode.
    pub fn lambdas(&self) -> (f64, f64) {
        stability_lambdas(self.k, self.alpha, self.eps)
    }

    /// `z = j + ik Î ρ`.
    pub fn z_from_j(&self, rho: C64, j: C64) -> C64 {
        j + self.ik() * self.i_hat() * rho
    }

    /// `j = z - ik Î ρ`.
    pub fn j_from_z(&self, rho: C64, z: C64) -> C64 {
        z - self.ik() * self.i_hat() * rho
    }
}

/// The per-mode problem as a [`SemilinearProblem`].
pub fn telegraph_mode_problem(k: i32, alpha: f64, eps: f64) -> Result<SemilinearProblem> {
    let m = TelegraphMode::new(k, alpha, eps)?;
    SemilinearProblem::new(
        format!("telegraph-k{k}"),
        1,
        LAMBDA.to_vec(),
        Arc::new(move |u| m.f(u)),
        Arc::new(move |_, inc| m.f(inc)),
    )
}

/// `(λ, λ̃)` with `λ = 1 - eps k̂²` and `λ̃ = 1 - eps k̂²(1 + eps k̂²(α + Î))`, written without
/// cancellation for large `eps k²`.
pub fn stability_lambdas(k: i32, alpha: f64, eps: f64) -> (f64, f64) {
    stability_lambdas_s(eps * (k as f64) * (k as f64), alpha)
}

/// The same as a function of `s = eps k²`.
pub fn stability_lambdas_s(s: f64, alpha: f64) -> (f64, f64) {
    let den = 1.0 + alpha * s;
    let i_hat = 1.0 / den;
    let sigma = s * i_hat;
    let lambda = (1.0 + (alpha - 1.0) * s) * i_hat;
    // with 1 = Î + ασ: 1 - σ - σ²(α + Î) = σ(α - 2 + Î) + Î(1 - σ²)
    let lambda_t = sigma * (alpha - 2.0 + i_hat) + i_hat * (1.0 - sigma * sigma);
    (lambda, lambda_t)
}

/// Decomposition of order 0 or 1 of one telegraph mode.
#[derive(Debug, Clone, Copy)]
pub struct TelegraphMaps {
    mode: TelegraphMode,
    n: usize,
}

pub fn telegraph_decomposition(k: i32, alpha: f64, eps: f64, n: usize) -> Result<Decomposition> {
    let mode = TelegraphMode::new(k, alpha, eps)?;
    if n > 1 {
        return Err(Error::InvalidParameter(format!("telegraph decompositions exist for n <= 1, got {n}")));
    }
    if n == 1 && alpha < 2.0 {
        return Err(Error::InvalidParameter(format!(
            "the order-1 telegraph macro is unstable for alpha = {alpha} < 2"
        )));
    }
    Ok(Decomposition::new(TelegraphMaps { mode, n }, format!("telegraph-k{k}-{n}")))
}

impl TelegraphMaps {
    /// Off-diagonal entries `(a, b)` of `Ω_0 = [[1, a], [b, 1]]`.
    fn omega0_coupling(&self) -> (C64, C64) {
        if self.n == 0 {
            return (re(0.0), re(0.0));
        }
        let m = &self.mode;
        let ei = m.eps * m.i_hat();
        let ik = m.ik();
        (ik * ei, -ik * (ei * m.k_hat2() * m.c()))
    }

    fn omega0(&self, u: &State) -> State {
        let (a, b) = self.omega0_coupling();
        State(vec![u[0] + a * u[1], b * u[0] + u[1]])
    }

    /// Decay rate `K` of the macro density.
    pub fn macro_rate(&self) -> f64 {
        let m = &self.mode;
        let kh2 = m.k_hat2();
        if self.n == 0 {
            kh2
        } else {
            kh2 * (1.0 + m.eps * kh2 * m.c())
        }
    }

    /// `(1 - eps K)`, the decay rate of the rescaled fast macro component times `eps`.
    pub fn fast_rate(&self) -> f64 {
        let (l, lt) = self.mode.lambdas();
        if self.n == 0 {
            l
        } else {
            lt
        }
    }

    fn rescale(tau: f64, u: &State) -> State {
        State(vec![u[0], u[1] * (-tau).exp()])
    }
}

impl DissipativeMaps for TelegraphMaps {
    fn order(&self) -> usize {
        self.n
    }

    fn eps(&self) -> f64 {
        self.mode.eps
    }

    fn lambda(&self) -> &[u32] {
        &LAMBDA
    }

    fn omega(&self, tau: f64, u: &State) -> State {
        self.omega0(&Self::rescale(tau, u))
    }

    fn macro_field(&self, u: &State) -> State {
        let kk = self.macro_rate();
        State(vec![-u[0] * kk, u[1] * kk])
    }

    fn eta(&self, tau: f64, u: &State) -> State {
        let m = &self.mode;
        let r = Self::rescale(tau, u);
        let ik = m.ik();
        let kh2 = m.k_hat2();
        let c = m.c();
        if self.n == 0 {
            State(vec![ik * r[1], ik * (kh2 * c) * r[0]])
        } else {
            let amp = ik * (m.eps * kh2 * (m.alpha + m.i_hat() * (2.0 + m.eps * kh2 * c)));
            State(vec![amp * r[1], amp * (kh2 * c) * r[0]])
        }
    }

    fn shift_phi(&self, k: usize, u: &State) -> State {
        assert!(k >= 1 && k <= self.n, "shift_phi order {k} out of range");
        &self.omega0(u) - u
    }

    fn omega_dtau(&self, tau: f64, u: &State) -> Option<State> {
        let (a, _) = self.omega0_coupling();
        let dz = -u[1] * (-tau).exp();
        Some(State(vec![a * dz, dz]))
    }

    fn omega_jvp(&self, tau: f64, _u: &State, v: &State) -> Option<State> {
        Some(self.omega(tau, v))
    }

    fn exact_macro(&self, t: f64, v0: &State) -> Option<State> {
        let eps = self.mode.eps;
        Some(State(vec![
            v0[0] * (-self.macro_rate() * t).exp(),
            v0[1] * (-self.fast_rate() * t / eps).exp(),
        ]))
    }

    fn omega0_inverse(&self, u: &State) -> Option<State> {
        let (a, b) = self.omega0_coupling();
        let det = re(1.0) - a * b;
        Some(State(vec![(u[0] - a * u[1]) / det, (u[1] - b * u[0]) / det]))
    }
}

/// Exact propagator `e^{At}` of a 2×2 matrix, stable for stiff `A`.
pub fn expm2(a: [[C64; 2]; 2], t: f64) -> [[C64; 2]; 2] {
    let m = (a[0][0] + a[1][1]) * 0.5;
    let h = (a[0][0] - a[1][1]) * 0.5;
    let bc = a[0][1] * a[1][0];
    let delta2 = h * h + bc;
    let mut delta = delta2.sqrt();
    if delta.re < 0.0 {
        delta = -delta;
    }
    if (delta * t).norm() < 1.0 {
        // e^{At} = e^{mt} [C I + S (A - mI)], C = cosh(Δt), S = sinh(Δt)/Δ as series in Δ²
        let x = delta2 * (t * t);
        let mut cc = re(0.0);
        let mut ss = re(0.0);
        let mut term_c = re(1.0);
        let mut term_s = re(t);
        for n in 0..30 {
            cc += term_c;
            ss += term_s;
            let nn = n as f64;
            term_c *= x / ((2.0 * nn + 1.0) * (2.0 * nn + 2.0));
            term_s *= x / ((2.0 * nn + 2.0) * (2.0 * nn + 3.0));
        }
        let em = (m * t).exp();
        return [
            [em * (cc + ss * h), em * ss * a[0][1]],
            [em * ss * a[1][0], em * (cc - ss * h)],
        ];
    }
    // e^{At} = e^{(m+Δ)t} P+ + e^{(m-Δ)t} P-, with Δ ± h formed without cancellation
    let (dph, dmh) = if (delta * h.conj()).re >= 0.0 {
        let dph = delta + h;
        (dph, bc / dph)
    } else {
        let dmh = delta - h;
        (bc / dmh, dmh)
    };
    let ep = ((m + delta) * t).exp();
    let en = ((m - delta) * t).exp();
    let inv = 1.0 / (delta * 2.0);
    [
        [(ep * dph + en * dmh) * inv, (ep - en) * a[0][1] * inv],
        [(ep - en) * a[1][0] * inv, (ep * dmh + en * dph) * inv],
    ]
}

/// Exact solution of one mode at time `t`.
pub fn exact_mode_solution(mode: &TelegraphMode, u0: &State, t: f64) -> State {
    let e = expm2(mode.system_matrix(), t);
    State(vec![e[0][0] * u0[0] + e[0][1] * u0[1], e[1][0] * u0[0] + e[1][1] * u0[1]])
}

/// Fourier coefficients `v_k`, `|k| ≤ kmax`, of a periodic function by the trapezoid rule.
pub fn spectrum(fun: impl Fn(f64) -> f64, kmax: usize, points: usize) -> Vec<C64> {
    let dx = 2.0 * PI / points as f64;
    let vals: Vec<f64> = (0..points).map(|i| fun(i as f64 * dx)).collect();
    let km = kmax as i32;
    (-km..=km)
        .map(|k| {
            vals.iter()
                .enumerate()
                .map(|(i, &v)| C64::from_polar(v, -(k as f64) * i as f64 * dx))
                .sum::<C64>()
                / points as f64
        })
        .collect()
}

/// Initial data of a telegraph run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TelegraphData {
    /// `ρ0 = e^{cos x}`, `j0 = ½cos³x`
    Standard,
    /// `ρ0 = e^{cos x}`, `j0 = -∂_x ρ0`
    NearEquilibrium,
}

/// The full telegraph field: modes `-kmax..=kmax` with spectra of `(ρ, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphField {
    pub kmax: usize,
    pub alpha: f64,
    pub rho0: Vec<C64>,
    pub j0: Vec<C64>,
    /// Largest aliasing estimate of the quadrature, in the modulus of spectrum entries.
    pub aliasing: f64,
}

impl TelegraphField {
    pub fn new(kmax: usize, alpha: f64, data: TelegraphData) -> Self {
        let pts = 8 * kmax + 1;
        let rho = |x: f64| x.cos().exp();
        let j: Box<dyn Fn(f64) -> f64> = match data {
            TelegraphData::Standard => Box::new(|x: f64| 0.5 * x.cos().powi(3)),
            TelegraphData::NearEquilibrium => Box::new(|x: f64| x.sin() * x.cos().exp()),
        };
        let rho0 = spectrum(rho, kmax, pts);
        let j0 = spectrum(&j, kmax, pts);
        let fine_r = spectrum(rho, kmax, 4 * pts);
        let fine_j = spectrum(&j, kmax, 4 * pts);
        let aliasing = rho0
            .iter()
            .zip(&fine_r)
            .chain(j0.iter().zip(&fine_j))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        TelegraphField { kmax, alpha, rho0, j0, aliasing }
    }

    pub fn modes(&self) -> impl Iterator<Item = i32> {
        let km = self.kmax as i32;
        -km..=km
    }

    pub fn index(&self, k: i32) -> usize {
        (k + self.kmax as i32) as usize
    }

    /// Initial state `(ρ_k, z_k)` of mode `k`.
    pub fn initial_mode(&self, k: i32, eps: f64) -> Result<State> {
        let m = TelegraphMode::new(k, self.alpha, eps)?;
        let i = self.index(k);
        Ok(State(vec![self.rho0[i], m.z_from_j(self.rho0[i], self.j0[i])]))
    }
}

/// Recover `(ρ_k, j_k)` from per-mode states `(ρ_k, z_k)` listed for `k = -kmax..=kmax`.
pub fn mode_densities(kmax: usize, alpha: f64, eps: f64, modes: &[State]) -> Result<(Vec<C64>, Vec<C64>)> {
    if modes.len() != 2 * kmax + 1 {
        return Err(Error::Dimension { expected: 2 * kmax + 1, got: modes.len() });
    }
    let km = kmax as i32;
    let mut rho = Vec::with_capacity(modes.len());
    let mut j = Vec::with_capacity(modes.len());
    for (k, u) in (-km..=km).zip(modes) {
        let m = TelegraphMode::new(k, alpha, eps)?;
        rho.push(u[0]);
        j.push(m.j_from_z(u[0], u[1]));
    }
    Ok((rho, j))
}

/// Physical fields `(ρ(x_i), j(x_i))` on `points` uniform nodes.
pub fn telegraph_assemble(
    kmax: usize,
    alpha: f64,
    eps: f64,
    modes: &[State],
    points: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (rho, j) = mode_densities(kmax, alpha, eps, modes)?;
    let km = kmax as i32;
    for (a, name) in [(&rho, "rho"), (&j, "j")] {
        for k in 1..=km {
            let p = a[(km + k) as usize];
            let q = a[(km - k) as usize];
            if (p - q.conj()).norm() > 1e-10 * (1.0 + p.norm()) {
                return Err(Error::Invariant(format!("{name} spectrum is not Hermitian at k = {k}")));
            }
        }
    }
    let dx = 2.0 * PI / points as f64;
    let synth = |a: &[C64]| -> Result<Vec<f64>> {
        (0..points)
            .map(|i| {
                let x = i as f64 * dx;
                let v: C64 = (-km..=km).zip(a).map(|(k, c)| c * C64::from_polar(1.0, k as f64 * x)).sum();
                if v.im.abs() > 1e-10 * (1.0 + v.re.abs()) {
                    return Err(Error::Invariant(format!("field has imaginary part {}", v.im)));
                }
                Ok(v.re)
            })
            .collect()
    };
    Ok((synth(&rho)?, synth(&j)?))
}

/// Spectral `H¹` norm `sqrt(Σ (1 + k²)(|ρ_k|² + |j_k|²))`.
pub fn h1_norm(kmax: usize, rho: &[C64], j: &[C64]) -> f64 {
    let km = kmax as i32;
    (-km..=km)
        .zip(rho.iter().zip(j))
        .map(|(k, (r, jj))| (1.0 + (k * k) as f64) * (r.norm_sqr() + jj.norm_sqr()))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        let m = TelegraphMode::new(10, 2.0, 1e-2).unwrap();
        assert!((m.k_hat2() - 100.0 / 3.0).abs() < 1e-12);
        let e = m.k_hat2().exp();
        assert!((e / 3e14 - 1.0).abs() < 0.05, "{e}");
        let (l, _) = m.lambdas();
        assert!((l - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(stability_lambdas(0, 2.0, 0.3), (1.0, 1.0));
    }

    #[test]
    fn polynomial_matches_f() {
        let m = TelegraphMode::new(-4, 2.0, 0.05).unwrap();
        let u = State(vec![C64::new(0.3, -0.1), C64::new(-0.2, 0.6)]);
        assert!((&m.polynomial().eval(&u) - &m.f(&u)).norm() < 1e-14);
    }

    #[test]
    fn lambda_tilde_matches_direct_formula() {
        for &s in &[0.0, 1e-3, 0.5, 1.0, 7.0, 40.0] {
            for &alpha in &[1.0, 1.5, 2.0, 3.0] {
                let sigma = s / (1.0 + alpha * s);
                let direct = 1.0 - sigma * (1.0 + sigma * (alpha + 1.0 / (1.0 + alpha * s)));
                let (_, lt) = stability_lambdas_s(s, alpha);
                assert!((lt - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_mode_has_no_field() {
        let p = telegraph_mode_problem(0, 2.0, 0.1).unwrap();
        let u = State::from_real(&[1.3, -0.2]);
        assert_eq!(p.f(&u), State::zeros(2));
    }

    #[test]
    fn cos_cubed_spectrum() {
        let s = spectrum(|x| 0.5 * x.cos().powi(3), 12, 97);
        for (i, c) in s.iter().enumerate() {
            let k = i as i32 - 12;
            let want = match k.abs() {
                1 => 3.0 / 16.0,
                3 => 1.0 / 16.0,
                _ => 0.0,
            };
            assert!((c - re(want)).norm() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn propagator_matches_series() {
        // direct Taylor series of e^{At} for a mild matrix
        let m = TelegraphMode::new(3, 2.0, 0.5).unwrap();
        let a = m.system_matrix();
        let t = 0.7;
        let mut acc = [[re(1.0), re(0.0)], [re(0.0), re(1.0)]];
        let mut term = acc;
        for n in 1..60 {
            let mut next = [[re(0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    next[i][j] = (term[i][0] * a[0][j] + term[i][1] * a[1][j]) * (t / n as f64);
                }
            }
            term = next;
            for i in 0..2 {
                for j in 0..2 {
                    acc[i][j] += term[i][j];
                }
            }
        }
        let e = expm2(a, t);
        for i in 0..2 {
            for j in 0..2 {
                assert!((e[i][j] - acc[i][j]).norm() < 1e-13, "{i}{j}");
            }
        }
    }
}
