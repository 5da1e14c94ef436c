use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{conservation, telegraph, toy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Toy,
    Telegraph,
    Conservation,
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Toy => "toy",
            ProblemKind::Telegraph => "telegraph",
            ProblemKind::Conservation => "conservation",
        }
    }
}

/// Initial data variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    #[default]
    Standard,
    /// `z0 = 0` (toy) or `j0 = -∂_x ρ0` (telegraph)
    NearEquilibrium,
}

/// Problem parameters of a run-config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub problem: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_viscosity: Option<bool>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub data: DataKind,
}

impl ProblemBlock {
    pub fn new(problem: ProblemKind) -> Self {
        ProblemBlock {
            problem,
            alpha: None,
            kmax: None,
            n_grid: None,
            b: None,
            include_viscosity: None,
            t_end: None,
            data: DataKind::Standard,
        }
    }

    pub fn with_data(mut self, data: DataKind) -> Self {
        self.data = data;
        self
    }

    pub fn t_end(&self) -> f64 {
        self.t_end.unwrap_or(match self.problem {
            ProblemKind::Toy => toy::T_END,
            ProblemKind::Telegraph => 1.0,
            ProblemKind::Conservation => conservation::T_END,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(telegraph::DEFAULT_ALPHA)
    }

    pub fn kmax(&self) -> usize {
        self.kmax.unwrap_or(telegraph::DEFAULT_KMAX)
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid.unwrap_or(conservation::DEFAULT_N)
    }

    pub fn b(&self) -> f64 {
        self.b.unwrap_or(conservation::DEFAULT_B)
    }

    pub fn include_viscosity(&self) -> bool {
        self.include_viscosity.unwrap_or(false)
    }

    /// Default stiffness list: `2^-3..2^-15` for the toy, `1..2^-18` for the conservation law
    /// and `1..2^-15` for the telegraph equation.
    pub fn default_eps(&self) -> Vec<f64> {
        let range = match self.problem {
            ProblemKind::Toy => 3..=15,
            ProblemKind::Telegraph => 0..=15,
            ProblemKind::Conservation => 0..=18,
        };
        range.map(|k| 2f64.powi(-k)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.t_end();
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Config(format!("T must be positive, got {t}")));
        }
        match self.problem {
            ProblemKind::Telegraph if self.alpha() < 1.0 => {
                Err(Error::Config(format!("alpha must be >= 1, got {}", self.alpha())))
            }
            ProblemKind::Conservation if self.n_grid() < 3 => {
                Err(Error::Config(format!("N must be at least 3, got {}", self.n_grid())))
            }
            ProblemKind::Conservation if self.data != DataKind::Standard => {
                Err(Error::Config("the conservation law has no near-equilibrium variant".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Direct,
    Micromacro,
}

impl SolveMode {
    pub fn name(&self) -> &'static str {
        match self {
            SolveMode::Direct => "direct",
            SolveMode::Micromacro => "micromacro",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Abs,
    Mod,
    H1,
}

/// A grid of `(eps, dt)` cells for one problem, mode, decomposition order and scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub problem: ProblemBlock,
    pub mode: SolveMode,
    /// Decomposition order (ignored in direct mode).
    #[serde(default)]
    pub n: usize,
    /// Scheme order.
    pub q: usize,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub dt: Vec<f64>,
    #[serde(default = "default_norms")]
    pub norms: Vec<NormKind>,
    #[serde(default)]
    pub seed: u64,
    /// Record wall-clock time per cell (makes the CSV non-reproducible).
    #[serde(default)]
    pub timing: bool,
}

fn default_norms() -> Vec<NormKind> {
    vec![NormKind::Abs, NormKind::Mod, NormKind::H1]
}

/// `2^-4..2^-10`
pub fn default_dt() -> Vec<f64> {
    (4..=10).map(|k| 2f64.powi(-k)).collect()
}

impl SweepConfig {
    pub fn new(problem: ProblemBlock, mode: SolveMode, n: usize, q: usize) -> Self {
        SweepConfig { problem, mode, n, q, eps: Vec::new(), dt: Vec::new(), norms: default_norms(), seed: 0, timing: false }
    }

    pub fn with_eps(mut self, eps: Vec<f64>) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_dt(mut self, dt: Vec<f64>) -> Self {
        self.dt = dt;
        self
    }

    /// Fill empty lists with defaults, sort them decreasingly and check consistency.
    pub fn resolved(&self) -> Result<SweepConfig> {
        let mut c = self.clone();
        if c.eps.is_empty() {
            c.eps = c.problem.default_eps();
        }
        if c.dt.is_empty() {
            c.dt = default_dt();
        }
        c.eps.sort_by(|a, b| b.total_cmp(a));
        c.eps.dedup();
        c.dt.sort_by(|a, b| b.total_cmp(a));
        c.dt.dedup();
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        if self.eps.is_empty() || self.dt.is_empty() || self.norms.is_empty() {
            return Err(Error::Config("eps, dt and norms lists must be nonempty".into()));
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(Error::Config(format!("eps must lie in (0, 1], got {e}")));
        }
        if !(1..=3).contains(&self.q) {
            return Err(Error::Config(format!("scheme order must be 1, 2 or 3, got {}", self.q)));
        }
        let max_n = match self.problem.problem {
            ProblemKind::Toy => 2,
            _ => 1,
        };
        if self.mode == SolveMode::Micromacro && self.n > max_n {
            return Err(Error::Config(format!(
                "{} decompositions exist up to order {max_n}",
                self.problem.problem.name()
            )));
        }
        if self.problem.problem == ProblemKind::Telegraph && self.mode == SolveMode::Micromacro && self.n == 1 && self.problem.alpha() < 2.0 {
            return Err(Error::Config("the order-1 telegraph decomposition needs alpha >= 2".into()));
        }
        if self.problem.include_viscosity() && self.mode == SolveMode::Micromacro {
            return Err(Error::Config("micro-macro runs need include_viscosity = false".into()));
        }
        let t = self.problem.t_end();
        let dt_min = self.dt.iter().copied().fold(f64::INFINITY, f64::min);
        let dt_max = self.dt.iter().copied().fold(0.0, f64::max);
        if !(dt_min > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        if dt_max * 4.0 > t * (1.0 + 1e-12) {
            return Err(Error::Config(format!("need at least 4 steps: dt = {dt_max} is too large for T = {t}")));
        }
        for &dt in &self.dt {
            let steps = t / dt;
            let ratio = dt / dt_min;
            if (steps - steps.round()).abs() > 1e-9 * steps || (ratio - ratio.round()).abs() > 1e-9 * ratio {
                return Err(Error::Config(format!(
                    "dt = {dt} must divide T = {t} and be a multiple of the smallest dt {dt_min}"
                )));
            }
        }
        Ok(())
    }
}

/// A single run: one `eps`, one `dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemBlock,
    pub mode: SolveMode,
    #[serde(default)]
    pub n: usize,
    pub q: usize,
    pub eps: f64,
    pub dt: f64,
}

impl RunConfig {
    pub fn as_sweep(&self) -> SweepConfig {
        SweepConfig::new(self.problem.clone(), self.mode, self.n, self.q)
            .with_eps(vec![self.eps])
            .with_dt(vec![self.dt])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_problem_block() {
        let c: SweepConfig = serde_json::from_str(
            r#"{"problem": {"problem": "conservation", "N": 16, "b": 0.2, "T": 0.25},
                "mode": "micromacro", "n": 1, "q": 3}"#,
        )
        .unwrap();
        let r = c.resolved().unwrap();
        assert_eq!(r.eps.len(), 19);
        assert_eq!(r.dt.len(), 7);
        assert_eq!(r.problem.n_grid(), 16);
    }

    #[test]
    fn rejects_bad_grids() {
        let base = SweepConfig::new(ProblemBlock::new(ProblemKind::Toy), SolveMode::Micromacro, 1, 2);
        assert!(base.clone().with_dt(vec![0.5]).resolved().is_err());
        assert!(base.clone().with_dt(vec![0.1, 0.03]).resolved().is_err());
        assert!(base.clone().with_eps(vec![2.0]).resolved().is_err());
        assert!(base.clone().with_dt(vec![0.25, 0.125]).resolved().is_ok());
        let mut bad = base.clone();
        bad.n = 3;
        assert!(bad.resolved().is_err());
    }
}
