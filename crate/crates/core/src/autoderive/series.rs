use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{State, C64};

/// Exponent multi-index of a monomial `u^α`.
pub type Exps = Vec<u8>;

/// Caps on the size of symbolic objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_terms: usize,
    pub max_degree: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_terms: 20_000, max_degree: 16 }
    }
}

/// Which exponential a mode index `j` stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeConvention {
    /// `e^{ijθ}`
    Periodic,
    /// `e^{-jτ}`, only defined for `j ≥ 0`
    Dissipative,
}

/// A polynomial vector field `C^d -> C^d`: per component a list of monomials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyVectorField {
    dim: usize,
    comps: Vec<Vec<(C64, Exps)>>,
}

impl PolyVectorField {
    pub fn zero(dim: usize) -> Self {
        PolyVectorField { dim, comps: vec![Vec::new(); dim] }
    }

    /// Add `coef · u^exps` to component `r`.
    pub fn add_term(&mut self, r: usize, coef: C64, exps: &[u8]) -> &mut Self {
        assert_eq!(exps.len(), self.dim, "exponent length must equal the dimension");
        if coef != C64::new(0.0, 0.0) {
            self.comps[r].push((coef, exps.to_vec()));
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, r: usize) -> &[(C64, Exps)] {
        &self.comps[r]
    }

    pub fn max_degree(&self) -> usize {
        self.comps
            .iter()
            .flatten()
            .map(|(_, e)| degree(e))
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, u: &State) -> State {
        let pows = power_table(u, self.max_degree());
        State(
            self.comps
                .iter()
                .map(|terms| terms.iter().map(|(c, e)| c * monomial(&pows, e)).sum())
                .collect(),
        )
    }

    /// `f(base + inc) - f(base)` by telescoping each monomial, so `inc = 0` gives exactly 0.
    pub fn eval_diff(&self, base: &State, inc: &State) -> State {
        let deg = self.max_degree();
        let pb = power_table(base, deg);
        let shifted = base + inc;
        let ps = power_table(&shifted, deg);
        State(
            self.comps
                .iter()
                .map(|terms| {
                    terms
                        .iter()
                        .map(|(c, e)| c * monomial_diff(&pb, &ps, inc, e))
                        .sum()
                })
                .collect(),
        )
    }

    /// The same field as a θ-independent, ε-free map.
    pub fn to_map(&self) -> EpsModePolyMap {
        let mut m = EpsModePolyMap::zero(self.dim);
        for (r, terms) in self.comps.iter().enumerate() {
            for (c, e) in terms {
                m.comps[r].add(TermKey { mode: 0, eps_pow: 0, exps: e.clone() }, *c);
            }
        }
        m
    }
}

pub(crate) fn degree(e: &[u8]) -> usize {
    e.iter().map(|&a| a as usize).sum()
}

/// `pows[i][p] = u_i^p` for `p ≤ deg`.
pub(crate) fn power_table(u: &State, deg: usize) -> Vec<Vec<C64>> {
    u.iter()
        .map(|&x| {
            let mut v = Vec::with_capacity(deg + 1);
            let mut acc = C64::new(1.0, 0.0);
            for _ in 0..=deg {
                v.push(acc);
                acc *= x;
            }
            v
        })
        .collect()
}

pub(crate) fn monomial(pows: &[Vec<C64>], e: &[u8]) -> C64 {
    e.iter()
        .enumerate()
        .filter(|(_, &a)| a > 0)
        .map(|(i, &a)| pows[i][a as usize])
        .product()
}

// Π (b+i)^α - Π b^α = Σ_k [Π_{l<k} (b+i)_l^α_l] ((b+i)_k^α_k - b_k^α_k) [Π_{l>k} b_l^α_l]
// with (b+i)^a - b^a = i Σ_{m<a} (b+i)^m b^{a-1-m}.
fn monomial_diff(pb: &[Vec<C64>], ps: &[Vec<C64>], inc: &State, e: &[u8]) -> C64 {
    let mut total = C64::new(0.0, 0.0);
    let mut left = C64::new(1.0, 0.0);
    for (k, &a) in e.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let a = a as usize;
        let mut d = C64::new(0.0, 0.0);
        for m in 0..a {
            d += ps[k][m] * pb[k][a - 1 - m];
        }
        d *= inc[k];
        let right: C64 = e
            .iter()
            .enumerate()
            .skip(k + 1)
            .filter(|(_, &b)| b > 0)
            .map(|(l, &b)| pb[l][b as usize])
            .product();
        total += left * d * right;
        left *= ps[k][a];
    }
    total
}

/// Index of a term `ε^m e^{ijθ} u^α`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TermKey {
    pub mode: i32,
    pub eps_pow: u32,
    pub exps: Exps,
}

/// A scalar series `Σ c ε^m e^{ijθ} u^α`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    terms: BTreeMap<TermKey, C64>,
}

// Relative threshold below which a coefficient is treated as round-off and dropped.
const PRUNE_REL: f64 = 1e-14;

impl Series {
    pub fn new() -> Self {
        Series::default()
    }

    /// The coordinate function `u_i` in dimension `d`.
    pub fn var(i: usize, d: usize) -> Self {
        let mut exps = vec![0u8; d];
        exps[i] = 1;
        let mut s = Series::new();
        s.add(TermKey { mode: 0, eps_pow: 0, exps }, C64::new(1.0, 0.0));
        s
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TermKey, &C64)> {
        self.terms.iter()
    }

    pub fn add(&mut self, key: TermKey, c: C64) {
        let slot = self.terms.entry(key).or_insert(C64::new(0.0, 0.0));
        *slot += c;
    }

    pub fn add_scaled(&mut self, other: &Series, factor: C64) {
        for (k, c) in &other.terms {
            self.add(k.clone(), c * factor);
        }
    }

    /// Drop exact zeros and coefficients negligible next to the largest one.
    pub fn prune(&mut self) {
        let big = self.max_abs_coef();
        self.terms.retain(|_, c| c.norm() > PRUNE_REL * big);
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Keep the terms accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(&TermKey) -> bool) -> Series {
        Series {
            terms: self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, c)| (k.clone(), *c)).collect(),
        }
    }

    pub fn map_terms(&self, f: impl Fn(&TermKey, C64) -> Option<(TermKey, C64)>) -> Series {
        let mut out = Series::new();
        for (k, c) in &self.terms {
            if let Some((k2, c2)) = f(k, *c) {
                out.add(k2, c2);
            }
        }
        out
    }

    /// Product, discarding ε-powers above `trunc`.
    pub fn mul(&self, other: &Series, trunc: Option<u32>, limits: &Limits) -> Result<Series> {
        let mut out = Series::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let m = ka.eps_pow + kb.eps_pow;
                if trunc.is_some_and(|t| m > t) {
                    continue;
                }
                let exps: Exps = ka.exps.iter().zip(&kb.exps).map(|(a, b)| a + b).collect();
                if degree(&exps) > limits.max_degree {
                    return Err(Error::SizeLimit(format!(
                        "monomial degree {} exceeds cap {}",
                        degree(&exps),
                        limits.max_degree
                    )));
                }
                out.add(TermKey { mode: ka.mode + kb.mode, eps_pow: m, exps }, ca * cb);
            }
        }
        out.prune();
        if out.len() > limits.max_terms {
            return Err(Error::SizeLimit(format!(
                "{} terms exceed cap {}",
                out.len(),
                limits.max_terms
            )));
        }
        Ok(out)
    }

    /// `∂/∂u_i`.
    pub fn partial(&self, i: usize) -> Series {
        self.map_terms(|k, c| {
            let a = k.exps[i];
            (a > 0).then(|| {
                let mut exps = k.exps.clone();
                exps[i] -= 1;
                (TermKey { mode: k.mode, eps_pow: k.eps_pow, exps }, c * a as f64)
            })
        })
    }

    /// `∂/∂θ` in the periodic convention (factor `ij`).
    pub fn dtheta(&self) -> Series {
        self.map_terms(|k, c| (k.mode != 0).then(|| (k.clone(), c * C64::new(0.0, k.mode as f64))))
    }

    /// `∂/∂τ` in the dissipative convention (factor `-j`).
    pub fn dtau(&self) -> Series {
        self.map_terms(|k, c| (k.mode != 0).then(|| (k.clone(), c * (-(k.mode as f64)))))
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|k| degree(&k.exps)).max().unwrap_or(0)
    }

    pub fn max_eps_pow(&self) -> u32 {
        self.terms.keys().map(|k| k.eps_pow).max().unwrap_or(0)
    }

    pub fn min_mode(&self) -> Option<i32> {
        self.terms.keys().map(|k| k.mode).min()
    }

    /// Numeric value given precomputed powers of `u`.
    pub fn eval_with(&self, eps: f64, angle: f64, pows: &[Vec<C64>], conv: ModeConvention) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            let phase = match conv {
                ModeConvention::Periodic => C64::from_polar(1.0, k.mode as f64 * angle),
                ModeConvention::Dissipative => {
                    if k.mode < 0 {
                        return Err(Error::Invariant(format!(
                            "negative mode {} cannot be resummed dissipatively",
                            k.mode
                        )));
                    }
                    if k.mode == 0 {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new((-(k.mode as f64) * angle).exp(), 0.0)
                    }
                }
            };
            acc += c * phase * eps.powi(k.eps_pow as i32) * monomial(pows, &k.exps);
        }
        Ok(acc)
    }
}

/// A map `Σ_{j,m} ε^m e^{ijθ} P_{j,m}(u)`, one [`Series`] per output component.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsModePolyMap {
    pub comps: Vec<Series>,
    /// Largest ε-power kept when this map was produced, `None` if untruncated.
    pub trunc_order: Option<u32>,
}

impl EpsModePolyMap {
    pub fn zero(dim: usize) -> Self {
        EpsModePolyMap { comps: vec![Series::new(); dim], trunc_order: None }
    }

    pub fn identity(dim: usize) -> Self {
        EpsModePolyMap { comps: (0..dim).map(|i| Series::var(i, dim)).collect(), trunc_order: Some(0) }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn term_count(&self) -> usize {
        self.comps.iter().map(Series::len).sum()
    }

    pub fn max_degree(&self) -> usize {
        self.comps.iter().map(Series::max_degree).max().unwrap_or(0)
    }

    pub fn max_eps_pow(&self) -> u32 {
        self.comps.iter().map(Series::max_eps_pow).max().unwrap_or(0)
    }

    pub fn min_mode(&self) -> Option<i32> {
        self.comps.iter().filter_map(Series::min_mode).min()
    }

    /// Componentwise `self + factor · other`.
    pub fn add_scaled(&self, other: &EpsModePolyMap, factor: C64) -> EpsModePolyMap {
        let mut out = self.clone();
        for (a, b) in out.comps.iter_mut().zip(&other.comps) {
            a.add_scaled(b, factor);
            a.prune();
        }
        out.trunc_order = match (self.trunc_order, other.trunc_order) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        out
    }

    pub fn scale(&self, factor: C64) -> EpsModePolyMap {
        EpsModePolyMap::zero(self.dim()).add_scaled(self, factor)
    }

    pub fn map_series(&self, f: impl Fn(&Series) -> Series) -> EpsModePolyMap {
        EpsModePolyMap { comps: self.comps.iter().map(f).collect(), trunc_order: self.trunc_order }
    }

    /// Largest coefficient modulus among terms accepted by `pick`.
    pub fn max_coef_where(&self, pick: impl Fn(&TermKey) -> bool) -> f64 {
        self.comps
            .iter()
            .flat_map(|s| s.iter())
            .filter(|(k, _)| pick(k))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// Numeric evaluation at `(ε, θ or τ, u)`.
    pub fn eval(&self, eps: f64, angle: f64, u: &State, conv: ModeConvention) -> Result<State> {
        if u.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: u.dim() });
        }
        let pows = power_table(u, self.max_degree());
        self.comps
            .iter()
            .map(|s| s.eval_with(eps, angle, &pows, conv))
            .collect::<Result<Vec<_>>>()
            .map(State)
    }

    /// Flat list of terms for machine-readable output.
    pub fn term_list(&self) -> Vec<TermRecord> {
        let mut out = Vec::new();
        for (r, s) in self.comps.iter().enumerate() {
            for (k, c) in s.iter() {
                out.push(TermRecord {
                    component: r,
                    mode: k.mode,
                    eps_power: k.eps_pow,
                    re: c.re,
                    im: c.im,
                    exponents: k.exps.clone(),
                });
            }
        }
        out
    }
}

/// One term of a map, as written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermRecord {
    pub component: usize,
    pub mode: i32,
    pub eps_power: u32,
    pub re: f64,
    pub im: f64,
    pub exponents: Exps,
}

fn fmt_coef(c: C64) -> String {
    let tidy = |x: f64| {
        let s = format!("{x:.12}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s == "-0" {
            "0".to_string()
        } else {
            s
        }
    };
    match (c.re == 0.0, c.im == 0.0) {
        (_, true) => tidy(c.re),
        (true, false) => format!("{}i", tidy(c.im)),
        _ => format!("({}{:+}i)", tidy(c.re), c.im),
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            // pull a leading minus out of purely real or purely imaginary coefficients
            let negative = (c.im == 0.0 && c.re < 0.0) || (c.re == 0.0 && c.im < 0.0);
            let c = if negative { -*c } else { *c };
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors = Vec::new();
            if c != C64::new(1.0, 0.0) {
                factors.push(fmt_coef(c));
            }
            match k.eps_pow {
                0 => {}
                1 => factors.push("ε".into()),
                m => factors.push(format!("ε^{m}")),
            }
            if k.mode != 0 {
                factors.push(format!("e^({}iθ)", k.mode));
            }
            for (j, &a) in k.exps.iter().enumerate() {
                match a {
                    0 => {}
                    1 => factors.push(format!("u{}", j + 1)),
                    _ => factors.push(format!("u{}^{}", j + 1, a)),
                }
            }
            if factors.is_empty() {
                factors.push("1".into());
            }
            write!(f, "{}", factors.join("·"))?;
        }
        Ok(())
    }
}

impl fmt::Display for EpsModePolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, s) in self.comps.iter().enumerate() {
            writeln!(f, "  [{}] {}", r + 1, s)?;
        }
        Ok(())
    }
}
