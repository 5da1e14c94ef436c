//! The averaging recurrence for `g_θ(u) = -i e^{-iθΛ} f(e^{iθΛ} u)`.

use super::series::{EpsModePolyMap, Limits, PolyVectorField, Series, TermKey};
use crate::error::{Error, Result};
use crate::state::C64;

// Terms of an average that should vanish are accepted up to this size (relative to the
// largest coefficient of the map) and then dropped.
const AVERAGE_TOL: f64 = 1e-10;

/// `g_θ`: a monomial of component `r` with exponents `α` gets mode `Σ α_i λ_i - λ_r`
/// and a factor `-i`.
pub fn lift_to_g(f: &PolyVectorField, lambda: &[u32]) -> Result<EpsModePolyMap> {
    if lambda.len() != f.dim() {
        return Err(Error::Dimension { expected: f.dim(), got: lambda.len() });
    }
    let mut g = EpsModePolyMap::zero(f.dim());
    for r in 0..f.dim() {
        for (c, e) in f.component(r) {
            let j: i64 = e.iter().zip(lambda).map(|(&a, &l)| a as i64 * l as i64).sum::<i64>()
                - lambda[r] as i64;
            g.comps[r].add(TermKey { mode: j as i32, eps_pow: 0, exps: e.clone() }, c * C64::new(0.0, -1.0));
        }
    }
    g.trunc_order = Some(0);
    Ok(g)
}

/// `⟨map⟩`: the `j = 0` part.
pub fn average(map: &EpsModePolyMap) -> EpsModePolyMap {
    map.map_series(|s| s.filter(|k| k.mode == 0))
}

/// `g ∘ φ`, discarding ε-powers above `trunc`.
pub fn compose(g: &EpsModePolyMap, phi: &EpsModePolyMap, trunc: Option<u32>) -> Result<EpsModePolyMap> {
    compose_with(g, phi, trunc, &Limits::default())
}

pub fn compose_with(
    g: &EpsModePolyMap,
    phi: &EpsModePolyMap,
    trunc: Option<u32>,
    limits: &Limits,
) -> Result<EpsModePolyMap> {
    let d = phi.dim();
    if g.dim() != d {
        return Err(Error::Dimension { expected: d, got: g.dim() });
    }
    let max_pow = g.comps.iter().flat_map(|s| s.iter()).flat_map(|(k, _)| k.exps.iter().copied()).max().unwrap_or(0);
    // powers[i][p] = φ_i^p, built on demand
    let mut powers: Vec<Vec<Series>> = (0..d).map(|_| vec![unit(d)]).collect();
    for i in 0..d {
        let needed = g
            .comps
            .iter()
            .flat_map(|s| s.iter())
            .map(|(k, _)| k.exps[i])
            .max()
            .unwrap_or(0)
            .min(max_pow);
        for p in 1..=needed as usize {
            let next = powers[i][p - 1].mul(&phi.comps[i], trunc, limits)?;
            powers[i].push(next);
        }
    }
    let mut out = EpsModePolyMap::zero(d);
    for (r, s) in g.comps.iter().enumerate() {
        let mut acc = Series::new();
        for (k, c) in s.iter() {
            if trunc.is_some_and(|t| k.eps_pow > t) {
                continue;
            }
            let mut prod = Series::new();
            prod.add(TermKey { mode: k.mode, eps_pow: k.eps_pow, exps: vec![0; d] }, *c);
            for (i, &a) in k.exps.iter().enumerate() {
                if a > 0 {
                    prod = prod.mul(&powers[i][a as usize], trunc, limits)?;
                }
            }
            acc.add_scaled(&prod, C64::new(1.0, 0.0));
        }
        acc.prune();
        if acc.len() > limits.max_terms {
            return Err(Error::SizeLimit(format!("{} terms exceed cap {}", acc.len(), limits.max_terms)));
        }
        out.comps[r] = acc;
    }
    out.trunc_order = trunc;
    Ok(out)
}

fn unit(d: usize) -> Series {
    let mut s = Series::new();
    s.add(TermKey { mode: 0, eps_pow: 0, exps: vec![0; d] }, C64::new(1.0, 0.0));
    s
}

/// `∂_u φ · v`, discarding ε-powers above `trunc`.
pub fn jacobian_apply(
    phi: &EpsModePolyMap,
    v: &EpsModePolyMap,
    trunc: Option<u32>,
    limits: &Limits,
) -> Result<EpsModePolyMap> {
    let d = phi.dim();
    let mut out = EpsModePolyMap::zero(d);
    for r in 0..d {
        let mut acc = Series::new();
        for i in 0..d {
            let dphi = phi.comps[r].partial(i);
            if dphi.is_empty() || v.comps[i].is_empty() {
                continue;
            }
            acc.add_scaled(&dphi.mul(&v.comps[i], trunc, limits)?, C64::new(1.0, 0.0));
        }
        acc.prune();
        out.comps[r] = acc;
    }
    out.trunc_order = trunc;
    Ok(out)
}

/// `T(φ) = g∘φ - ∂_uφ · ⟨g∘φ⟩`.
pub fn operator_t(phi: &EpsModePolyMap, g: &EpsModePolyMap, trunc: Option<u32>) -> Result<EpsModePolyMap> {
    let limits = Limits::default();
    let gphi = compose_with(g, phi, trunc, &limits)?;
    let jac = jacobian_apply(phi, &average(&gphi), trunc, &limits)?;
    let mut t = gphi.add_scaled(&jac, C64::new(-1.0, 0.0));
    t.trunc_order = trunc;
    Ok(t)
}

/// Largest `j = 0` coefficient of `map` relative to its largest coefficient.
pub fn relative_average(map: &EpsModePolyMap) -> f64 {
    let all = map.max_coef_where(|_| true);
    if all == 0.0 {
        return 0.0;
    }
    map.max_coef_where(|k| k.mode == 0) / all
}

/// `Φ^[n+1] = id + ε Σ_{j≠0} c_j(T(Φ^[n])) e^{ijθ}/(ij)`, with `T` truncated at `ε^n`.
pub fn next_phi(phi_n: &EpsModePolyMap, g: &EpsModePolyMap, n: u32) -> Result<EpsModePolyMap> {
    let t = operator_t(phi_n, g, Some(n))?;
    let avg = relative_average(&t);
    if avg > AVERAGE_TOL {
        return Err(Error::Invariant(format!("T(Φ) has nonzero average (relative size {avg:e})")));
    }
    let d = phi_n.dim();
    let integral = t.map_series(|s| {
        s.map_terms(|k, c| {
            (k.mode != 0).then(|| {
                (
                    TermKey { mode: k.mode, eps_pow: k.eps_pow + 1, exps: k.exps.clone() },
                    c / C64::new(0.0, k.mode as f64),
                )
            })
        })
    });
    let mut phi = EpsModePolyMap::identity(d).add_scaled(&integral, C64::new(1.0, 0.0));
    phi.trunc_order = Some(n + 1);
    Ok(phi)
}

/// `G = ⟨g∘Φ⟩` and `δ = (1/ε)∂_θΦ + ∂_uΦ·G - g∘Φ`, both without truncation.
pub fn make_g_delta(phi: &EpsModePolyMap, g: &EpsModePolyMap) -> Result<(EpsModePolyMap, EpsModePolyMap)> {
    let limits = Limits::default();
    let bad = phi.max_coef_where(|k| k.mode != 0 && k.eps_pow == 0);
    if bad > 0.0 {
        return Err(Error::Invariant("Φ has a θ-dependent term without a factor ε".into()));
    }
    let gphi = compose_with(g, phi, None, &limits)?;
    let big_g = average(&gphi);
    let dtheta = phi.map_series(|s| {
        s.dtheta().map_terms(|k, c| {
            Some((TermKey { mode: k.mode, eps_pow: k.eps_pow - 1, exps: k.exps.clone() }, c))
        })
    });
    let jac = jacobian_apply(phi, &big_g, None, &limits)?;
    let mut delta = dtheta
        .add_scaled(&jac, C64::new(1.0, 0.0))
        .add_scaled(&gphi, C64::new(-1.0, 0.0));
    delta.trunc_order = None;
    let mut big_g = big_g;
    big_g.trunc_order = None;
    Ok((big_g, delta))
}

/// All objects of the averaging construction up to order `n`.
#[derive(Debug, Clone)]
pub struct Averaging {
    pub g: EpsModePolyMap,
    /// `Φ^[0], …, Φ^[n]`
    pub phis: Vec<EpsModePolyMap>,
    pub big_g: EpsModePolyMap,
    pub delta: EpsModePolyMap,
}

impl Averaging {
    pub fn order(&self) -> usize {
        self.phis.len() - 1
    }
}

/// Run the recurrence to order `n`.
pub fn derive_averaging(f: &PolyVectorField, lambda: &[u32], n: usize) -> Result<Averaging> {
    let g = lift_to_g(f, lambda)?;
    let mut phis = vec![EpsModePolyMap::identity(f.dim())];
    for k in 0..n {
        let next = next_phi(&phis[k], &g, k as u32)?;
        phis.push(next);
    }
    let (big_g, delta) = make_g_delta(&phis[n], &g)?;
    Ok(Averaging { g, phis, big_g, delta })
}
