//! Error sweeps over `(eps, dt)` grids.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expkit::ErkScheme;
use crate::state::State;

use super::case::{uniform_grid, Case, Norms};
use super::config::{NormKind, SolveMode, SweepConfig};
use super::experiment::{asymptotic_slope, EpsSlope};
use super::fit::{fit_order, per_eps_curves, uniform_envelope, OrderFit};
use super::reference::{compute_reference, direct_trajectory, solve_blocks, ReferenceInfo, Trajectory};

/// Fine solves for the macro and micro errors use this fraction of the smallest `dt`.
pub const FINE_FACTOR: f64 = 8.0;

/// One cell of a sweep: errors are maxima over the run's own time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub problem: String,
    pub mode: String,
    pub n: usize,
    pub q: usize,
    pub eps: f64,
    pub dt: f64,
    pub err_abs: Option<f64>,
    pub err_mod: Option<f64>,
    #[serde(rename = "err_H1")]
    pub err_h1: Option<f64>,
    /// Macro and micro parts against a fine solve of the same decomposition (micro-macro only).
    pub err_macro: Option<f64>,
    pub err_micro: Option<f64>,
    /// Seconds; 0 unless timing is enabled.
    pub wallclock: f64,
}

impl ErrorRecord {
    pub fn errors(&self) -> impl Iterator<Item = f64> + '_ {
        [self.err_abs, self.err_mod, self.err_h1, self.err_macro, self.err_micro].into_iter().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub eps: f64,
    pub dt: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceEntry {
    pub eps: f64,
    #[serde(flatten)]
    pub info: ReferenceInfo,
}

/// Extra per-cell norms kept out of the CSV: maxima over the grid and values at the final time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellNorms {
    pub eps: f64,
    pub dt: f64,
    pub sup: Norms,
    pub last: Norms,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub config: SweepConfig,
    pub records: Vec<ErrorRecord>,
    pub failures: Vec<CellFailure>,
    pub references: Vec<ReferenceEntry>,
    pub norms: Vec<CellNorms>,
}

impl SweepOutput {
    /// `(dt, max over eps)` of a norm picked from [`CellNorms`], sorted by decreasing `dt`.
    pub fn envelope(&self, pick: impl Fn(&CellNorms) -> Option<f64>) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for c in &self.norms {
            if let Some(e) = pick(c) {
                match out.iter_mut().find(|p| p.0 == c.dt) {
                    Some(p) => p.1 = p.1.max(e),
                    None => out.push((c.dt, e)),
                }
            }
        }
        out.sort_by(|a, b| b.0.total_cmp(&a.0));
        out
    }
}

/// Per-block macro and micro components.
struct Split {
    v: Vec<State>,
    w: Vec<State>,
}

fn splits(case: &Case, n: usize, scheme: &ErkScheme, grid: &[f64], h: f64) -> Result<(Trajectory, Vec<Split>)> {
    let pts = solve_blocks(case, n, scheme, grid, h)?;
    let u = (0..grid.len()).map(|i| pts.iter().map(|b| b[i].u.clone()).collect()).collect();
    let s = (0..grid.len())
        .map(|i| Split {
            v: pts.iter().map(|b| b[i].state.v.clone()).collect(),
            w: pts.iter().map(|b| b[i].state.w.clone()).collect(),
        })
        .collect();
    Ok((Trajectory { t: grid.to_vec(), u }, s))
}

fn euclid(a: &[State], b: &[State]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm().powi(2)).sum::<f64>().sqrt()
}

struct EpsContext<'a> {
    config: &'a SweepConfig,
    case: Case,
    reference: Trajectory,
    dt_min: f64,
    fine: Option<Vec<Split>>,
}

impl EpsContext<'_> {
    fn cell(&self, dt: f64) -> Result<(ErrorRecord, CellNorms)> {
        let c = self.config;
        let scheme = ErkScheme::of_order(c.q)?;
        let grid = uniform_grid(c.problem.t_end(), dt);
        let stride = (dt / self.dt_min).round() as usize;
        let start = Instant::now();
        let (traj, split) = match c.mode {
            SolveMode::Direct => (direct_trajectory(&self.case, &scheme, &grid, dt)?, None),
            SolveMode::Micromacro => {
                let (t, s) = splits(&self.case, c.n, &scheme, &grid, dt)?;
                (t, Some(s))
            }
        };
        let wallclock = if c.timing { start.elapsed().as_secs_f64() } else { 0.0 };
        let mut norms = Norms::default();
        let mut last = Norms::default();
        for (i, u) in traj.u.iter().enumerate() {
            last = self.case.distance(u, &self.reference.u[i * stride])?;
            norms = norms.max(last);
        }
        let (mut err_macro, mut err_micro) = (None, None);
        if let (Some(s), Some(f)) = (split, &self.fine) {
            let (mut em, mut ew) = (0.0f64, 0.0f64);
            for (i, x) in s.iter().enumerate() {
                let y = &f[i * stride];
                em = em.max(euclid(&x.v, &y.v));
                ew = ew.max(euclid(&x.w, &y.w));
            }
            err_macro = Some(em);
            err_micro = Some(ew);
        }
        let want = |k: NormKind| c.norms.contains(&k);
        let rec = ErrorRecord {
            problem: c.problem.problem.name().into(),
            mode: c.mode.name().into(),
            n: c.n,
            q: c.q,
            eps: self.case.eps,
            dt,
            err_abs: want(NormKind::Abs).then_some(norms.abs),
            err_mod: want(NormKind::Mod).then_some(norms.modified),
            err_h1: norms.h1.filter(|_| want(NormKind::H1)),
            err_macro,
            err_micro,
            wallclock,
        };
        if let Some(e) = rec.errors().find(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::NonFinite { context: format!("error value {e}") });
        }
        Ok((rec, CellNorms { eps: self.case.eps, dt, sup: norms, last }))
    }
}

type EpsResult = (Vec<ErrorRecord>, Vec<CellNorms>, Vec<CellFailure>, ReferenceEntry);

fn sweep_eps(config: &SweepConfig, eps: f64) -> Result<EpsResult> {
    let case = Case::new(&config.problem, eps)?;
    let dt_min = config.dt.iter().copied().fold(f64::INFINITY, f64::min);
    let ref_grid = uniform_grid(config.problem.t_end(), dt_min);
    let (reference, info) = compute_reference(&case, &ref_grid)?;
    let fine = match config.mode {
        SolveMode::Direct => None,
        SolveMode::Micromacro => {
            let h = dt_min / FINE_FACTOR;
            Some(splits(&case, config.n, &ErkScheme::erk3(), &ref_grid, h)?.1)
        }
    };
    let ctx = EpsContext { config, case, reference, dt_min, fine };
    let mut records = Vec::new();
    let mut norms = Vec::new();
    let mut failures = Vec::new();
    for &dt in &config.dt {
        match ctx.cell(dt) {
            Ok((r, n)) => {
                records.push(r);
                norms.push(n);
            }
            Err(e) => failures.push(CellFailure { eps, dt, error: e.to_string() }),
        }
    }
    Ok((records, norms, failures, ReferenceEntry { eps, info }))
}

/// Run every cell of the sweep. Cell failures are collected, not returned as errors.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    let config = config.resolved()?;
    let results: Vec<_> = config.eps.par_iter().map(|&eps| (eps, sweep_eps(&config, eps))).collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut references = Vec::new();
    let mut norms = Vec::new();
    for (eps, r) in results {
        match r {
            Ok((rec, nrm, fail, re)) => {
                records.extend(rec);
                norms.extend(nrm);
                failures.extend(fail);
                references.push(re);
            }
            Err(e) => {
                failures.extend(config.dt.iter().map(|&dt| CellFailure { eps, dt, error: e.to_string() }))
            }
        }
    }
    records.sort_by(|a, b| b.eps.total_cmp(&a.eps).then(b.dt.total_cmp(&a.dt)));
    failures.sort_by(|a, b| b.eps.total_cmp(&a.eps).then(b.dt.total_cmp(&a.dt)));
    references.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    norms.sort_by(|a, b| b.eps.total_cmp(&a.eps).then(b.dt.total_cmp(&a.dt)));
    Ok(SweepOutput { config, records, failures, references, norms })
}

pub fn records_to_csv(records: &[ErrorRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn read_records_csv(text: &str) -> Result<Vec<ErrorRecord>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(Error::from)
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))
}

/// Fitted orders of one norm: the uniform envelope and each `eps` separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormFit {
    pub norm: NormKind,
    /// `None` with fewer than 3 usable points.
    pub uniform: Option<OrderFit>,
    pub per_eps: Vec<EpsSlope>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub cells: usize,
    pub failures: usize,
    pub fits: Vec<NormFit>,
    pub references: Vec<ReferenceEntry>,
}

pub fn summarize_sweep(out: &SweepOutput) -> SweepSummary {
    let fits = out
        .config
        .norms
        .iter()
        .map(|&norm| NormFit {
            norm,
            uniform: fit_order(&uniform_envelope(&out.records, norm)).ok(),
            per_eps: per_eps_curves(&out.records, norm)
                .into_iter()
                .map(|(eps, c)| EpsSlope { eps, slope: asymptotic_slope(&c) })
                .collect(),
        })
        .filter(|f| f.uniform.is_some() || f.per_eps.iter().any(|e| e.slope.is_some()))
        .collect();
    SweepSummary {
        cells: out.records.len() + out.failures.len(),
        failures: out.failures.len(),
        fits,
        references: out.references.clone(),
    }
}

/// Write `<stem>.csv`, `<stem>.config.json`, `<stem>.summary.json` and, if there are any,
/// `<stem>.failures.json`.
pub fn write_sweep(dir: &Path, stem: &str, out: &SweepOutput) -> Result<()> {
    write_file(&dir.join(format!("{stem}.csv")), &records_to_csv(&out.records)?)?;
    write_file(&dir.join(format!("{stem}.config.json")), &to_json(&out.config)?)?;
    write_file(&dir.join(format!("{stem}.summary.json")), &to_json(&summarize_sweep(out))?)?;
    if !out.failures.is_empty() {
        write_file(&dir.join(format!("{stem}.failures.json")), &to_json(&out.failures)?)?;
    }
    Ok(())
}
