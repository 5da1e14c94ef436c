//! Shifted maps and their dissipative resummation into `(Ω, F, η)`.

use std::sync::Arc;

use super::averaging::{derive_averaging, Averaging};
use super::series::{power_table, EpsModePolyMap, ModeConvention, PolyVectorField, Series, TermKey};
use crate::error::{Error, Result};
use crate::micromacro::DissipativeMaps;
use crate::state::{State, C64};

/// `φ̃_θ = e^{iθΛ} φ_θ`: adds `λ_r` to every mode of component `r`.
pub fn shift_map(map: &EpsModePolyMap, lambda: &[u32]) -> EpsModePolyMap {
    let mut out = map.clone();
    for (s, &l) in out.comps.iter_mut().zip(lambda) {
        *s = s.map_terms(|k, c| {
            Some((TermKey { mode: k.mode + l as i32, eps_pow: k.eps_pow, exps: k.exps.clone() }, c))
        });
    }
    out
}

/// Terms with a negative mode, as `(component, key)`.
pub fn negative_modes(map: &EpsModePolyMap) -> Vec<(usize, TermKey)> {
    map.comps
        .iter()
        .enumerate()
        .flat_map(|(r, s)| s.iter().filter(|(k, _)| k.mode < 0).map(move |(k, _)| (r, k.clone())))
        .collect()
}

/// The ε-independent symbolic data of an autoderived decomposition.
#[derive(Debug, Clone)]
pub struct DissipativeSet {
    pub lambda: Vec<u32>,
    /// `Φ̃^[n]`, read with `e^{-jτ}` it is `Ω_τ`
    pub omega: EpsModePolyMap,
    /// `G^[n]`; the macro field is `F = iG`
    pub big_g: EpsModePolyMap,
    /// `δ̃^[n]`; the defect is `η_τ = i δ̃` read with `e^{-jτ}`
    pub delta: EpsModePolyMap,
    /// `Φ^[k] - id` for `k = 1..=n`
    pub shift_maps: Vec<EpsModePolyMap>,
    omega_dtau: EpsModePolyMap,
    omega_partials: Vec<Vec<Series>>,
}

/// Resum shifted maps: `Ω_τ = Σ e^{-jτ} c_j(Φ̃)`, `η_τ = i Σ e^{-jτ} c_j(δ̃)`, `F = iG`.
pub fn to_dissipative(
    shifted_phi: &EpsModePolyMap,
    shifted_delta: &EpsModePolyMap,
    big_g: &EpsModePolyMap,
    lambda: &[u32],
) -> Result<DissipativeSet> {
    for (name, m) in [("shifted Φ", shifted_phi), ("shifted δ", shifted_delta)] {
        if let Some((r, k)) = negative_modes(m).into_iter().next() {
            return Err(Error::Invariant(format!(
                "{name} has negative mode {} in component {}",
                k.mode,
                r + 1
            )));
        }
    }
    if big_g.max_coef_where(|k| k.mode != 0) > 0.0 {
        return Err(Error::Invariant("averaged field G depends on θ".into()));
    }
    let d = shifted_phi.dim();
    Ok(DissipativeSet {
        lambda: lambda.to_vec(),
        omega: shifted_phi.clone(),
        big_g: big_g.clone(),
        delta: shifted_delta.clone(),
        shift_maps: Vec::new(),
        omega_dtau: shifted_phi.map_series(Series::dtau),
        omega_partials: shifted_phi
            .comps
            .iter()
            .map(|s| (0..d).map(|i| s.partial(i)).collect())
            .collect(),
    })
}

/// Build `Φ^[1..n]`, `G^[n]`, `δ^[n]` and resum them.
pub fn derive_decomposition(f: &PolyVectorField, lambda: &[u32], n: usize) -> Result<DissipativeSet> {
    let av = derive_averaging(f, lambda, n)?;
    from_averaging(&av, lambda)
}

pub fn from_averaging(av: &Averaging, lambda: &[u32]) -> Result<DissipativeSet> {
    let n = av.order();
    let sphi = shift_map(&av.phis[n], lambda);
    let sdelta = shift_map(&av.delta, lambda);
    let mut set = to_dissipative(&sphi, &sdelta, &av.big_g, lambda)?;
    let d = lambda.len();
    set.shift_maps = av.phis[1..]
        .iter()
        .map(|p| p.add_scaled(&EpsModePolyMap::identity(d), C64::new(-1.0, 0.0)))
        .collect();
    Ok(set)
}

impl DissipativeSet {
    pub fn order(&self) -> usize {
        self.shift_maps.len()
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// Numeric decomposition for one value of ε.
    pub fn at_eps(self: &Arc<Self>, eps: f64) -> AutoDecomposition {
        AutoDecomposition { set: self.clone(), eps }
    }
}

/// An autoderived decomposition evaluated at a fixed ε.
#[derive(Debug, Clone)]
pub struct AutoDecomposition {
    set: Arc<DissipativeSet>,
    eps: f64,
}

const VALIDATED: &str = "modes were validated non-negative at construction";

impl AutoDecomposition {
    pub fn set(&self) -> &DissipativeSet {
        &self.set
    }

    fn diss(&self, m: &EpsModePolyMap, tau: f64, u: &State) -> State {
        m.eval(self.eps, tau, u, ModeConvention::Dissipative).expect(VALIDATED)
    }
}

impl DissipativeMaps for AutoDecomposition {
    fn order(&self) -> usize {
        self.set.order()
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn lambda(&self) -> &[u32] {
        &self.set.lambda
    }

    fn omega(&self, tau: f64, u: &State) -> State {
        self.diss(&self.set.omega, tau, u)
    }

    fn macro_field(&self, u: &State) -> State {
        self.diss(&self.set.big_g, 0.0, u).scale(C64::new(0.0, 1.0))
    }

    fn eta(&self, tau: f64, u: &State) -> State {
        self.diss(&self.set.delta, tau, u).scale(C64::new(0.0, 1.0))
    }

    fn shift_phi(&self, k: usize, u: &State) -> State {
        assert!(k >= 1 && k <= self.order(), "shift_phi order {k} out of range");
        self.set.shift_maps[k - 1]
            .eval(self.eps, 0.0, u, ModeConvention::Periodic)
            .expect("periodic evaluation cannot fail")
    }

    fn omega_dtau(&self, tau: f64, u: &State) -> Option<State> {
        Some(self.diss(&self.set.omega_dtau, tau, u))
    }

    fn omega_jvp(&self, tau: f64, u: &State, v: &State) -> Option<State> {
        let deg = self.set.omega.max_degree();
        let pows = power_table(u, deg);
        let out = self
            .set
            .omega_partials
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v.iter())
                    .filter(|(s, _)| !s.is_empty())
                    .map(|(s, vi)| {
                        s.eval_with(self.eps, tau, &pows, ModeConvention::Dissipative).expect(VALIDATED) * vi
                    })
                    .sum()
            })
            .collect();
        Some(State(out))
    }
}
