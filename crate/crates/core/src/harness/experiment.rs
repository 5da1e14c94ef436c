//! The four experiments: order reduction, uniform accuracy, micro scaling and the
//! near-equilibrium order gain. Each writes CSV files and a JSON summary with pass/fail gates.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expkit::ErkScheme;
use crate::micromacro::{e_diagnostic, e_diagnostic_rescaled};

use super::case::{uniform_grid, Case};
use super::config::{DataKind, NormKind, ProblemBlock, ProblemKind, SolveMode, SweepConfig};
use super::fit::{fit_order, per_eps_curves, uniform_envelope, OrderFit};
use super::reference::solve_blocks;
use super::sweep::{run_sweep, to_json, write_file, write_sweep, CellFailure, ReferenceEntry, SweepOutput};

/// Errors below this are treated as roundoff when picking the asymptotic window.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;
/// Points in the asymptotic window of a per-eps fit.
pub const WINDOW: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    OrderReduction,
    Uniform,
    MicroScaling,
    NearEquilibrium,
}

impl ExperimentName {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentName::OrderReduction => "order_reduction",
            ExperimentName::Uniform => "uniform",
            ExperimentName::MicroScaling => "micro_scaling",
            ExperimentName::NearEquilibrium => "near_equilibrium",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "order_reduction" => Ok(ExperimentName::OrderReduction),
            "uniform" => Ok(ExperimentName::Uniform),
            "micro_scaling" => Ok(ExperimentName::MicroScaling),
            "near_equilibrium" => Ok(ExperimentName::NearEquilibrium),
            _ => Err(Error::Config(format!("unknown experiment {s}"))),
        }
    }
}

/// A pass/fail check on one number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub pass: bool,
}

impl Gate {
    pub fn new(name: impl Into<String>, value: f64, min: Option<f64>, max: Option<f64>) -> Gate {
        let pass = value.is_finite() && min.is_none_or(|m| value >= m) && max.is_none_or(|m| value <= m);
        Gate { name: name.into(), value, min, max, pass }
    }

    /// `|value - target| <= tol`
    pub fn band(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Gate {
        Gate::new(name, value, Some(target - tol), Some(target + tol))
    }

    pub fn at_least(name: impl Into<String>, value: f64, min: f64) -> Gate {
        Gate::new(name, value, Some(min), None)
    }

    pub fn at_most(name: impl Into<String>, value: f64, max: f64) -> Gate {
        Gate::new(name, value, None, Some(max))
    }

    pub fn describe(&self) -> String {
        let range = match (self.min, self.max) {
            (Some(a), Some(b)) => format!("in [{}, {}]", bound(a), bound(b)),
            (Some(a), None) => format!(">= {}", bound(a)),
            (None, Some(b)) => format!("<= {}", bound(b)),
            (None, None) => "finite".into(),
        };
        format!("{} = {:.4e} (want {range})", self.name, self.value)
    }
}

fn bound(x: f64) -> String {
    // strict inequalities against zero are stored as the smallest positive normal
    if x.abs() == f64::MIN_POSITIVE {
        return if x > 0.0 { "0+".into() } else { "0-".into() };
    }
    if x != 0.0 && !(1e-3..1e4).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsSlope {
    pub eps: f64,
    /// `None` when fewer than 3 points lie above the roundoff floor.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeSummary {
    pub label: String,
    pub norm: NormKind,
    pub envelope: Vec<(f64, f64)>,
    pub uniform: OrderFit,
    pub per_eps: Vec<EpsSlope>,
}

/// Sizes of the micro part at one `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MicroProfile {
    pub eps: f64,
    pub n: usize,
    /// `|w(0)|`
    pub w0: f64,
    /// `sup_t |w(t)|` over the grid
    pub w_sup: f64,
    /// `sup_t |E(t)|` over the grid
    pub e_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentName,
    pub problem: ProblemKind,
    pub gates: Vec<Gate>,
    pub slopes: Vec<SlopeSummary>,
    pub micro: Vec<MicroProfile>,
    pub references: Vec<ReferenceEntry>,
    pub failures: Vec<CellFailure>,
    /// Fits of other norms, reported without gates.
    pub diagnostics: Vec<(String, OrderFit)>,
}

impl ExperimentReport {
    fn new(experiment: ExperimentName, problem: ProblemKind) -> Self {
        ExperimentReport {
            experiment,
            problem,
            gates: Vec::new(),
            slopes: Vec::new(),
            micro: Vec::new(),
            references: Vec::new(),
            failures: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.gates.iter().all(|g| g.pass)
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }
}

/// Slope over the smallest `WINDOW` steps whose error exceeds the roundoff floor.
pub fn asymptotic_slope(curve: &[(f64, f64)]) -> Option<f64> {
    let above: Vec<(f64, f64)> = curve.iter().copied().filter(|p| p.1 > ROUNDOFF_FLOOR).collect();
    let start = above.len().saturating_sub(WINDOW);
    fit_order(&above[start..]).ok().map(|f| f.slope)
}

pub fn summarize(label: &str, out: &SweepOutput, norm: NormKind) -> Result<SlopeSummary> {
    let envelope = uniform_envelope(&out.records, norm);
    let uniform = fit_order(&envelope)?;
    let per_eps = per_eps_curves(&out.records, norm)
        .into_iter()
        .map(|(eps, c)| EpsSlope { eps, slope: asymptotic_slope(&c) })
        .collect();
    Ok(SlopeSummary { label: label.into(), norm, envelope, uniform, per_eps })
}

/// Default stiffness and step lists of an experiment.
pub fn default_dt(problem: ProblemKind) -> Vec<f64> {
    // explicit steps of the telegraph micro part see -k̂² ≈ -kmax² for small eps
    let range = match problem {
        ProblemKind::Telegraph => 6..=12,
        _ => 4..=10,
    };
    range.map(|k| 2f64.powi(-k)).collect()
}

fn sweep_config(block: ProblemBlock, mode: SolveMode, n: usize, q: usize) -> SweepConfig {
    let dt = default_dt(block.problem);
    SweepConfig::new(block, mode, n, q).with_dt(dt)
}

/// Micro sizes sampled every `dt` from an ERK3 solve whose step also resolves the layer of
/// width `eps`.
pub fn micro_profile(case: &Case, n: usize, t_end: f64, dt: f64) -> Result<MicroProfile> {
    let grid = uniform_grid(t_end, dt);
    let pts = solve_blocks(case, n, &ErkScheme::erk3(), &grid, dt.min(case.eps / 8.0))?;
    let decomps = (0..case.blocks.len()).map(|i| case.decomposition(i, n)).collect::<Result<Vec<_>>>()?;
    let (mut w0, mut w_sup, mut e_sup) = (0.0, 0.0f64, 0.0f64);
    for i in 0..grid.len() {
        let (mut w2, mut e2) = (0.0, 0.0);
        for (b, p) in pts.iter().enumerate() {
            let s = &p[i];
            let prob = &case.blocks[b].problem;
            let e = if s.rescaled_macro {
                e_diagnostic_rescaled(&decomps[b], prob, &s.state.v, &s.state.w)
            } else {
                e_diagnostic(&decomps[b], prob, s.t, &s.state.v, &s.state.w)
            };
            w2 += s.state.w.norm().powi(2);
            e2 += e.norm().powi(2);
        }
        if i == 0 {
            w0 = f64::sqrt(w2);
        }
        w_sup = w_sup.max(w2.sqrt());
        e_sup = e_sup.max(e2.sqrt());
    }
    Ok(MicroProfile { eps: case.eps, n, w0, w_sup, e_sup })
}

fn fit_eps(profiles: &[MicroProfile], pick: impl Fn(&MicroProfile) -> f64) -> Result<OrderFit> {
    let pts: Vec<(f64, f64)> = profiles.iter().map(|p| (p.eps, pick(p))).collect();
    fit_order(&pts)
}

fn micro_csv(profiles: &[MicroProfile]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in profiles {
        w.serialize(p)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

struct Runner<'a> {
    report: ExperimentReport,
    out_dir: Option<&'a Path>,
}

impl Runner<'_> {
    fn sweep(&mut self, stem: &str, config: &SweepConfig) -> Result<SweepOutput> {
        let out = run_sweep(config)?;
        if let Some(dir) = self.out_dir {
            write_sweep(dir, &format!("{}-{stem}", self.report.experiment.name()), &out)?;
        }
        self.report.failures.extend(out.failures.iter().cloned());
        self.report.references.extend(out.references.iter().cloned());
        Ok(out)
    }

    /// Uniform slope within `target ± tol` (or at least `target - tol` when `one_sided`) and,
    /// optionally, per-eps asymptotic slopes at least `target - tol`.
    fn slope_gates(&mut self, label: &str, out: &SweepOutput, norm: NormKind, target: f64, tol: f64, one_sided: bool, per_eps: bool) -> Result<()> {
        let s = summarize(label, out, norm)?;
        let name = format!("{label}: uniform slope");
        self.report.gates.push(if one_sided {
            Gate::at_least(name, s.uniform.slope, target - tol)
        } else {
            Gate::band(name, s.uniform.slope, target, tol)
        });
        if per_eps {
            let worst = s.per_eps.iter().filter_map(|e| e.slope).fold(f64::INFINITY, f64::min);
            self.report.gates.push(Gate::at_least(format!("{label}: smallest per-eps slope"), worst, target - tol));
        }
        self.report.slopes.push(s);
        Ok(())
    }
}

/// Run an experiment with its default configuration. Files are written to `out_dir` if given.
pub fn run_experiment(name: ExperimentName, problem: ProblemKind, out_dir: Option<&Path>) -> Result<ExperimentReport> {
    let mut r = Runner { report: ExperimentReport::new(name, problem), out_dir };
    let block = ProblemBlock::new(problem);
    match (name, problem) {
        (ExperimentName::OrderReduction, ProblemKind::Toy) => {
            let mut eps = block.default_eps();
            eps.push(1.0);
            let cfg = sweep_config(block, SolveMode::Direct, 0, 2).with_eps(eps);
            let out = r.sweep("toy-direct-q2", &cfg)?;
            let stiff: Vec<_> = out.records.iter().filter(|x| x.eps < 1.0).cloned().collect();
            let env = fit_order(&uniform_envelope(&stiff, NormKind::Mod))?;
            r.report.gates.push(Gate::at_most("direct q2: uniform slope over eps < 1", env.slope, 1.3));
            let curves = per_eps_curves(&out.records, NormKind::Mod);
            let one = curves.iter().find(|c| c.0 == 1.0).ok_or_else(|| Error::Invariant("missing eps = 1".into()))?;
            let f1 = fit_order(&one.1)?;
            r.report.gates.push(Gate::at_least("direct q2: slope at eps = 1", f1.slope, 1.7));
            r.report.slopes.push(summarize("direct q2", &out, NormKind::Mod)?);
        }
        (ExperimentName::Uniform, ProblemKind::Toy) => {
            for (n, q) in [(1, 2), (2, 3)] {
                let cfg = sweep_config(block.clone(), SolveMode::Micromacro, n, q);
                let label = format!("toy n{n} q{q}");
                let out = r.sweep(&format!("toy-n{n}-q{q}"), &cfg)?;
                r.slope_gates(&label, &out, NormKind::Mod, q as f64, 0.3, false, true)?;
            }
        }
        (ExperimentName::Uniform, ProblemKind::Telegraph) => {
            let cfg = sweep_config(block, SolveMode::Micromacro, 1, 3);
            let out = r.sweep("telegraph-n1-q3", &cfg)?;
            r.slope_gates("telegraph n1 q3", &out, NormKind::H1, 2.0, 0.3, true, false)?;
            let env = uniform_envelope(&out.records, NormKind::H1);
            let consts: Vec<f64> = env.iter().map(|(dt, e)| e / (dt * dt)).collect();
            let growth = consts.iter().copied().fold(0.0, f64::max) / consts[0];
            r.report.gates.push(Gate::at_most("telegraph n1 q3: max_dt C(dt) / C(dt_max), C = err/dt²", growth, 1.5));
        }
        (ExperimentName::Uniform, ProblemKind::Conservation) => {
            let cfg = sweep_config(block.clone(), SolveMode::Micromacro, 1, 3);
            let out = r.sweep("conservation-n1-q3", &cfg)?;
            r.slope_gates("conservation n1 q3", &out, NormKind::H1, 2.0, 0.3, true, false)?;
            for (label, env) in [
                ("modified H1 at the final time", out.envelope(|c| c.last.h1)),
                ("absolute H1, max over the grid", out.envelope(|c| c.sup.h1_abs)),
            ] {
                r.report.diagnostics.push((label.into(), fit_order(&env)?));
            }
            let law = crate::problems::conservation::ConservationLaw::new(block.n_grid(), block.b(), false)?;
            let m0 = law.mass(&law.initial_state());
            let mut drift: f64 = 0.0;
            for &eps in &cfg.resolved()?.eps {
                let case = Case::new(&block, eps)?;
                let dt = default_dt(problem)[0];
                let traj = super::reference::micromacro_trajectory(&case, 1, &ErkScheme::erk3(), &uniform_grid(block.t_end(), dt), dt)?;
                for u in &traj.u {
                    drift = drift.max((law.mass(&u[0]) - m0).abs());
                }
            }
            r.report.gates.push(Gate::at_most("conservation: mass drift", drift, 1e-10));
        }
        (ExperimentName::NearEquilibrium, ProblemKind::Toy | ProblemKind::Telegraph) => {
            let cfg = sweep_config(block.with_data(DataKind::NearEquilibrium), SolveMode::Micromacro, 1, 3);
            let stem = format!("{}-n1-q3", problem.name());
            let out = r.sweep(&stem, &cfg)?;
            r.slope_gates(&format!("{} near equilibrium n1 q3", problem.name()), &out, NormKind::Abs, 3.0, 0.3, false, false)?;
        }
        (ExperimentName::MicroScaling, ProblemKind::Toy) => {
            let eps = block.default_eps();
            let dt = 2f64.powi(-10);
            for n in 0..=2 {
                let profiles = eps
                    .iter()
                    .map(|&e| micro_profile(&Case::new(&block, e)?, n, block.t_end(), dt))
                    .collect::<Result<Vec<_>>>()?;
                let target = (n + 1) as f64;
                let w = fit_eps(&profiles, |p| p.w_sup)?;
                r.report.gates.push(Gate::band(format!("toy n{n}: slope of sup|w| in eps"), w.slope, target, 0.3));
                if n == 0 {
                    // the order-0 change of variables is the identity at τ = 0, so w(0) = 0 exactly
                    let w0 = profiles.iter().map(|p| p.w0).fold(0.0, f64::max);
                    r.report.gates.push(Gate::at_most("toy n0: max |w(0)|", w0, 0.0));
                } else {
                    let w0 = fit_eps(&profiles, |p| p.w0)?;
                    r.report.gates.push(Gate::band(format!("toy n{n}: slope of |w(0)| in eps"), w0.slope, target, 0.2));
                    let e = fit_eps(&profiles, |p| p.e_sup)?;
                    r.report.gates.push(Gate::band(format!("toy n{n}: slope of sup|E| in eps"), e.slope, n as f64, 0.3));
                }
                r.report.micro.extend(profiles);
            }
            if let Some(dir) = out_dir {
                write_file(&dir.join("micro_scaling-toy.csv"), &micro_csv(&r.report.micro)?)?;
            }
        }
        _ => {
            return Err(Error::Config(format!("experiment {} is not defined for the {} problem", name.name(), problem.name())))
        }
    }
    if let Some(dir) = out_dir {
        let path = dir.join(format!("{}-{}.summary.json", name.name(), problem.name()));
        write_file(&path, &to_json(&r.report)?)?;
    }
    Ok(r.report)
}
