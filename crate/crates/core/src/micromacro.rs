//! The micro-macro system `u(t) = Ω_{t/eps}(v(t)) + w(t)`:
//!
//! ```text
//! v' = F(v)
//! w' = -(1/eps) Λ w + f(Ω_{t/eps}(v) + w) - f(Ω_{t/eps}(v)) - η_{t/eps}(v)
//! ```

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expkit::{integrate_split, ErkScheme, SplitOde};
use crate::problem::SemilinearProblem;
use crate::state::{re, State};

/// Evaluators of a decomposition of order `n` at a fixed `eps`.
///
/// Partial derivatives are optional; [`Decomposition`] falls back to central differences.
pub trait DissipativeMaps: Send + Sync {
    fn order(&self) -> usize;
    fn eps(&self) -> f64;
    fn lambda(&self) -> &[u32];
    /// `Ω_τ(u)`
    fn omega(&self, tau: f64, u: &State) -> State;
    /// `F(u)`
    fn macro_field(&self, u: &State) -> State;
    /// `η_τ(u)`
    fn eta(&self, tau: f64, u: &State) -> State;
    /// `eps φ^[k](u) = Φ^[k]_0(u) - u` for `1 ≤ k ≤ order`.
    fn shift_phi(&self, k: usize, u: &State) -> State;
    /// `∂_τ Ω_τ(u)`
    fn omega_dtau(&self, _tau: f64, _u: &State) -> Option<State> {
        None
    }
    /// `∂_u Ω_τ(u) · v`
    fn omega_jvp(&self, _tau: f64, _u: &State, _v: &State) -> Option<State> {
        None
    }
    /// Closed form of the rescaled macro state `r(t) = e^{-tΛ/eps} v(t)` from `r(0) = v(0)`.
    ///
    /// Only offered when `Ω_τ(u) = Ω_0(e^{-τΛ} u)` and `η_τ(u) = η_0(e^{-τΛ} u)`, so that the
    /// micro equation can be written in terms of `r` alone.
    fn exact_macro(&self, _t: f64, _v0: &State) -> Option<State> {
        None
    }
    /// Exact inverse of `Ω_0`, when it is available.
    fn omega0_inverse(&self, _u: &State) -> Option<State> {
        None
    }
}

/// A shareable decomposition with finite-difference fallbacks for missing partials.
#[derive(Clone)]
pub struct Decomposition {
    maps: Arc<dyn DissipativeMaps>,
    label: String,
    exact_partials: bool,
    use_exact_macro: bool,
}

impl fmt::Debug for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Decomposition")
            .field("label", &self.label)
            .field("order", &self.order())
            .field("eps", &self.eps())
            .finish()
    }
}

/// Step used by the central-difference fallbacks.
pub const FD_STEP: f64 = 1e-6;

impl Decomposition {
    pub fn new(maps: impl DissipativeMaps + 'static, label: impl Into<String>) -> Self {
        let maps: Arc<dyn DissipativeMaps> = Arc::new(maps);
        let probe = State::zeros(maps.lambda().len());
        let exact_partials = maps.omega_dtau(0.0, &probe).is_some() && maps.omega_jvp(0.0, &probe, &probe).is_some();
        Decomposition { maps, label: label.into(), exact_partials, use_exact_macro: true }
    }

    /// The same maps with partial derivatives taken by central differences.
    pub fn finite_difference_only(&self) -> Self {
        Decomposition {
            maps: Arc::new(NoPartials(self.maps.clone())),
            label: format!("{} (fd)", self.label),
            exact_partials: false,
            use_exact_macro: self.use_exact_macro,
        }
    }

    /// Step the macro equation numerically even when a closed form exists.
    pub fn with_numeric_macro(mut self) -> Self {
        self.use_exact_macro = false;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn order(&self) -> usize {
        self.maps.order()
    }

    pub fn eps(&self) -> f64 {
        self.maps.eps()
    }

    pub fn lambda(&self) -> &[u32] {
        self.maps.lambda()
    }

    pub fn dim(&self) -> usize {
        self.maps.lambda().len()
    }

    pub fn has_exact_partials(&self) -> bool {
        self.exact_partials
    }

    pub fn omega(&self, tau: f64, u: &State) -> State {
        self.maps.omega(tau, u)
    }

    pub fn macro_field(&self, u: &State) -> State {
        self.maps.macro_field(u)
    }

    pub fn eta(&self, tau: f64, u: &State) -> State {
        self.maps.eta(tau, u)
    }

    pub fn shift_phi(&self, k: usize, u: &State) -> State {
        self.maps.shift_phi(k, u)
    }

    pub fn omega_dtau(&self, tau: f64, u: &State) -> State {
        self.maps.omega_dtau(tau, u).unwrap_or_else(|| {
            let h = FD_STEP * (1.0 + tau.abs());
            (&self.omega(tau + h, u) - &self.omega(tau - h, u)) * (0.5 / h)
        })
    }

    pub fn omega_jvp(&self, tau: f64, u: &State, v: &State) -> State {
        self.maps.omega_jvp(tau, u, v).unwrap_or_else(|| {
            let nv = v.norm();
            if nv == 0.0 {
                return State::zeros(u.dim());
            }
            let h = FD_STEP * (1.0 + u.norm()) / nv;
            let up = u + &(v * h);
            let um = u - &(v * h);
            (&self.omega(tau, &up) - &self.omega(tau, &um)) * (0.5 / h)
        })
    }

    /// `Some(r(t))` if a closed-form macro is available and enabled.
    pub fn exact_macro(&self, t: f64, v0: &State) -> Option<State> {
        if self.use_exact_macro {
            self.maps.exact_macro(t, v0)
        } else {
            None
        }
    }

    pub fn has_exact_macro(&self) -> bool {
        self.exact_macro(0.0, &State::zeros(self.dim())).is_some()
    }

    pub fn omega0_inverse(&self, u: &State) -> Option<State> {
        self.maps.omega0_inverse(u)
    }
}

struct NoPartials(Arc<dyn DissipativeMaps>);

impl DissipativeMaps for NoPartials {
    fn order(&self) -> usize {
        self.0.order()
    }
    fn eps(&self) -> f64 {
        self.0.eps()
    }
    fn lambda(&self) -> &[u32] {
        self.0.lambda()
    }
    fn omega(&self, tau: f64, u: &State) -> State {
        self.0.omega(tau, u)
    }
    fn macro_field(&self, u: &State) -> State {
        self.0.macro_field(u)
    }
    fn eta(&self, tau: f64, u: &State) -> State {
        self.0.eta(tau, u)
    }
    fn shift_phi(&self, k: usize, u: &State) -> State {
        self.0.shift_phi(k, u)
    }
    fn exact_macro(&self, t: f64, v0: &State) -> Option<State> {
        self.0.exact_macro(t, v0)
    }
    fn omega0_inverse(&self, u: &State) -> Option<State> {
        self.0.omega0_inverse(u)
    }
}

/// Macro and micro components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroMacroState {
    pub v: State,
    pub w: State,
}

/// How `v(0)` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMethod {
    /// Exact inverse of `Ω_0` when available, iteration otherwise.
    #[default]
    Auto,
    /// `v_{k+1} = u0 - eps φ^[k+1](v_k)` up to `k + 1 = n`.
    Iterative,
    ExactInverse,
}

/// Initial data by the near-identity iteration; `w(0) = u0 - Ω_0(v)`.
pub fn init_conditions(decomp: &Decomposition, u0: &State) -> MicroMacroState {
    let mut v = u0.clone();
    for k in 1..=decomp.order() {
        v = u0 - &decomp.shift_phi(k, &v);
    }
    let w = u0 - &decomp.omega(0.0, &v);
    MicroMacroState { v, w }
}

/// Initial data with `v(0) = Ω_0^{-1}(u0)`.
pub fn init_conditions_exact(decomp: &Decomposition, u0: &State) -> Result<MicroMacroState> {
    let v = decomp
        .omega0_inverse(u0)
        .ok_or_else(|| Error::InvalidParameter(format!("{} has no exact inverse of Ω_0", decomp.label())))?;
    let w = u0 - &decomp.omega(0.0, &v);
    Ok(MicroMacroState { v, w })
}

pub fn init_with(decomp: &Decomposition, u0: &State, method: InitMethod) -> Result<MicroMacroState> {
    match method {
        InitMethod::Iterative => Ok(init_conditions(decomp, u0)),
        InitMethod::ExactInverse => init_conditions_exact(decomp, u0),
        InitMethod::Auto => match decomp.omega0_inverse(u0) {
            Some(_) => init_conditions_exact(decomp, u0),
            None => Ok(init_conditions(decomp, u0)),
        },
    }
}

/// `E = f_diff(Ω_{t/eps}(v), w) - η_{t/eps}(v)`, the non-stiff part of the micro equation.
pub fn e_diagnostic(decomp: &Decomposition, problem: &SemilinearProblem, t: f64, v: &State, w: &State) -> State {
    let tau = t / decomp.eps();
    source(problem, &decomp.omega(tau, v), &decomp.eta(tau, v), w)
}

/// `E` when the macro state is given in rescaled form `r = e^{-tΛ/eps} v`.
pub fn e_diagnostic_rescaled(decomp: &Decomposition, problem: &SemilinearProblem, r: &State, w: &State) -> State {
    source(problem, &decomp.omega(0.0, r), &decomp.eta(0.0, r), w)
}

fn source(problem: &SemilinearProblem, omega: &State, eta: &State, w: &State) -> State {
    problem.f_diff(omega, w) - eta.clone()
}

/// Full micro right-hand side `-(1/eps) Λ w + E`.
pub fn micro_rhs(decomp: &Decomposition, problem: &SemilinearProblem, t: f64, v: &State, w: &State) -> State {
    let eps = decomp.eps();
    let mut out = e_diagnostic(decomp, problem, t, v, w);
    for ((o, wi), &l) in out.iter_mut().zip(w.iter()).zip(decomp.lambda()) {
        *o -= wi * (l as f64 / eps);
    }
    out
}

/// `Ω_{t/eps}(v) + w`.
pub fn recompose(decomp: &Decomposition, t: f64, s: &MicroMacroState) -> State {
    &decomp.omega(t / decomp.eps(), &s.v) + &s.w
}

/// The coupled `(v, w)` system; `v` sees no stiff part.
pub struct CoupledSystem<'a> {
    decomp: &'a Decomposition,
    problem: &'a SemilinearProblem,
    stiff: Vec<f64>,
}

impl<'a> CoupledSystem<'a> {
    pub fn new(decomp: &'a Decomposition, problem: &'a SemilinearProblem) -> Self {
        let d = decomp.dim();
        let mut stiff = vec![0.0; d];
        stiff.extend(decomp.lambda().iter().map(|&l| l as f64 / decomp.eps()));
        CoupledSystem { decomp, problem, stiff }
    }
}

impl SplitOde for CoupledSystem<'_> {
    fn dim(&self) -> usize {
        self.stiff.len()
    }

    fn stiff_diag(&self) -> &[f64] {
        &self.stiff
    }

    fn nonstiff(&self, t: f64, vw: &State) -> Result<State> {
        let (v, w) = vw.split_at(self.decomp.dim());
        let fv = self.decomp.macro_field(&v);
        let e = e_diagnostic(self.decomp, self.problem, t, &v, &w);
        Ok(State::concat(&fv, &e))
    }
}

/// The micro equation alone, driven by a closed-form rescaled macro.
pub struct MicroSystem<'a> {
    decomp: &'a Decomposition,
    problem: &'a SemilinearProblem,
    r0: State,
    stiff: Vec<f64>,
}

impl<'a> MicroSystem<'a> {
    pub fn new(decomp: &'a Decomposition, problem: &'a SemilinearProblem, r0: State) -> Self {
        let stiff = decomp.lambda().iter().map(|&l| l as f64 / decomp.eps()).collect();
        MicroSystem { decomp, problem, r0, stiff }
    }

    fn r(&self, t: f64) -> State {
        self.decomp.exact_macro(t, &self.r0).expect("micro system requires a closed-form macro")
    }
}

impl SplitOde for MicroSystem<'_> {
    fn dim(&self) -> usize {
        self.stiff.len()
    }

    fn stiff_diag(&self) -> &[f64] {
        &self.stiff
    }

    fn nonstiff(&self, t: f64, w: &State) -> Result<State> {
        Ok(e_diagnostic_rescaled(self.decomp, self.problem, &self.r(t), w))
    }
}

/// Options for [`solve_micromacro`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Largest step; each grid interval is split uniformly.
    pub max_step: f64,
    pub init: InitMethod,
}

impl SolveOptions {
    pub fn with_step(max_step: f64) -> Self {
        SolveOptions { max_step, init: InitMethod::Auto }
    }
}

/// One output point of a micro-macro solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroMacroPoint {
    pub t: f64,
    pub state: MicroMacroState,
    /// `true` if `state.v` holds the rescaled macro `e^{-tΛ/eps} v(t)`.
    pub rescaled_macro: bool,
    /// Recomposed `Ω_{t/eps}(v) + w`.
    pub u: State,
}

/// Integrate the micro-macro system and recompose at every grid point.
pub fn solve_micromacro(
    decomp: &Decomposition,
    problem: &SemilinearProblem,
    scheme: &ErkScheme,
    u0: &State,
    t_grid: &[f64],
    opts: &SolveOptions,
) -> Result<Vec<MicroMacroPoint>> {
    problem.check_dim(u0)?;
    if decomp.dim() != problem.dim() {
        return Err(Error::Dimension { expected: problem.dim(), got: decomp.dim() });
    }
    let s0 = init_with(decomp, u0, opts.init)?;
    let d = decomp.dim();
    if decomp.has_exact_macro() {
        let sys = MicroSystem::new(decomp, problem, s0.v.clone());
        let ws = integrate_split(scheme, &sys, &s0.w, t_grid, opts.max_step)?;
        return t_grid
            .iter()
            .zip(ws)
            .map(|(&t, w)| {
                let r = sys.r(t);
                let u = &decomp.omega(0.0, &r) + &w;
                check_finite(&u, t)?;
                Ok(MicroMacroPoint { t, state: MicroMacroState { v: r, w }, rescaled_macro: true, u })
            })
            .collect();
    }
    let sys = CoupledSystem::new(decomp, problem);
    let vw0 = State::concat(&s0.v, &s0.w);
    let out = integrate_split(scheme, &sys, &vw0, t_grid, opts.max_step)?;
    t_grid
        .iter()
        .zip(out)
        .map(|(&t, vw)| {
            let (v, w) = vw.split_at(d);
            let state = MicroMacroState { v, w };
            let u = recompose(decomp, t, &state);
            check_finite(&u, t)?;
            Ok(MicroMacroPoint { t, state, rescaled_macro: false, u })
        })
        .collect()
}

fn check_finite(u: &State, t: f64) -> Result<()> {
    if u.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { context: format!("recomposed solution at t = {t}") })
    }
}

/// Terms of the defect identity `η = (1/eps)(∂_τΩ + ΛΩ) + ∂_uΩ·F - f∘Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectTerms {
    pub eta: State,
    pub fast: State,
    pub transport: State,
    pub f_omega: State,
}

impl DefectTerms {
    pub fn residual(&self) -> State {
        let mut r = self.eta.clone();
        r -= &self.fast;
        r -= &self.transport;
        r += &self.f_omega;
        r
    }

    /// Residual norm relative to the largest term of the identity.
    pub fn relative(&self) -> f64 {
        let scale = [&self.eta, &self.fast, &self.transport, &self.f_omega]
            .iter()
            .map(|s| s.norm())
            .fold(1.0, f64::max);
        self.residual().norm() / scale
    }
}

pub fn defect_terms(decomp: &Decomposition, problem: &SemilinearProblem, tau: f64, u: &State) -> DefectTerms {
    let eps = decomp.eps();
    let om = decomp.omega(tau, u);
    let mut fast = decomp.omega_dtau(tau, u);
    for ((a, o), &l) in fast.iter_mut().zip(om.iter()).zip(decomp.lambda()) {
        *a = (*a + o * re(l as f64)) / eps;
    }
    let transport = decomp.omega_jvp(tau, u, &decomp.macro_field(u));
    DefectTerms { eta: decomp.eta(tau, u), fast, transport, f_omega: problem.f(&om) }
}

/// `|η_τ(u) - [(1/eps)(∂_τΩ_τ(u) + ΛΩ_τ(u)) + ∂_uΩ_τ(u)·F(u) - f(Ω_τ(u))]|`.
pub fn defect_residual(decomp: &Decomposition, problem: &SemilinearProblem, tau: f64, u: &State) -> f64 {
    defect_terms(decomp, problem, tau, u).residual().norm()
}
