//! Reference trajectories.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expkit::{integrate, ErkScheme};
use crate::micromacro::{solve_micromacro, MicroMacroPoint, SolveOptions};
use crate::problems::telegraph::{exact_mode_solution, TelegraphMode};
use crate::state::State;

use super::case::Case;
use super::config::ProblemKind;

/// Toy reference: successive sup-norm differences below this.
pub const TOY_TOL: f64 = 1e-11;
/// Conservation reference: estimated modified `H¹` error below this.
pub const CONSERVATION_TOL: f64 = 1e-12;
/// Largest number of halvings before giving up.
pub const MAX_LEVELS: usize = 14;

/// States per grid time, each a list of blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub u: Vec<Vec<State>>,
}

impl Trajectory {
    fn from_blocks(t: &[f64], per_block: Vec<Vec<State>>) -> Trajectory {
        let u = (0..t.len()).map(|i| per_block.iter().map(|b| b[i].clone()).collect()).collect();
        Trajectory { t: t.to_vec(), u }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceInfo {
    pub method: String,
    /// Step of the accepted solve, if any.
    pub dt: Option<f64>,
    pub levels: usize,
    /// Last difference or error estimate of the refinement.
    pub estimate: f64,
}

/// Micro-macro solves of every block, returned per block.
pub fn solve_blocks(
    case: &Case,
    n: usize,
    scheme: &ErkScheme,
    t_grid: &[f64],
    max_step: f64,
) -> Result<Vec<Vec<MicroMacroPoint>>> {
    (0..case.blocks.len())
        .map(|i| {
            let d = case.decomposition(i, n)?;
            let b = &case.blocks[i];
            solve_micromacro(&d, &b.problem, scheme, &b.u0, t_grid, &SolveOptions::with_step(max_step))
        })
        .collect()
}

/// Recomposed micro-macro trajectory.
pub fn micromacro_trajectory(case: &Case, n: usize, scheme: &ErkScheme, t_grid: &[f64], max_step: f64) -> Result<Trajectory> {
    let pts = solve_blocks(case, n, scheme, t_grid, max_step)?;
    let per_block = pts.into_iter().map(|p| p.into_iter().map(|x| x.u).collect()).collect();
    Ok(Trajectory::from_blocks(t_grid, per_block))
}

/// The scheme applied to the stiff problem itself.
pub fn direct_trajectory(case: &Case, scheme: &ErkScheme, t_grid: &[f64], max_step: f64) -> Result<Trajectory> {
    let per_block = case
        .blocks
        .iter()
        .map(|b| integrate(scheme, &b.problem, case.eps, &b.u0, t_grid, max_step))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory::from_blocks(t_grid, per_block))
}

/// Largest distance over the grid.
fn sup_over_grid(a: &Trajectory, b: &Trajectory, dist: &dyn Fn(&[State], &[State]) -> Result<f64>) -> Result<f64> {
    let mut m: f64 = 0.0;
    for (x, y) in a.u.iter().zip(&b.u) {
        m = m.max(dist(x, y)?);
    }
    Ok(m)
}

/// Halve the step until the estimated error is below `tol`.
///
/// With `geometric = false` the estimate is the last difference itself, otherwise the tail
/// `d_k / (d_{k-1}/d_k - 1)` of the observed geometric decay.
fn refine(
    h0: f64,
    tol: f64,
    geometric: bool,
    solve: &dyn Fn(f64) -> Result<Trajectory>,
    dist: &dyn Fn(&[State], &[State]) -> Result<f64>,
) -> Result<(Trajectory, f64, usize, f64)> {
    let mut h = h0;
    let mut prev = solve(h)?;
    let mut last_diff: Option<f64> = None;
    for level in 1..=MAX_LEVELS {
        h /= 2.0;
        let cur = solve(h)?;
        let d = sup_over_grid(&prev, &cur, dist)?;
        let est = match (geometric, last_diff) {
            (false, _) => Some(d),
            (true, Some(p)) if d == 0.0 => (p >= 0.0).then_some(0.0),
            (true, Some(p)) if p / d > 1.5 => Some(d / (p / d - 1.0)),
            _ => None,
        };
        if let Some(e) = est {
            if e < tol {
                return Ok((cur, h, level, e));
            }
        }
        last_diff = Some(d);
        prev = cur;
    }
    Err(Error::Reference(format!(
        "no convergence to {tol:e} after {MAX_LEVELS} halvings (last difference {:e})",
        last_diff.unwrap_or(f64::NAN)
    )))
}

/// Reference on `t_grid`, which must be uniform and start at 0.
pub fn compute_reference(case: &Case, t_grid: &[f64]) -> Result<(Trajectory, ReferenceInfo)> {
    if t_grid.len() < 2 {
        let u = case.blocks.iter().map(|b| b.u0.clone()).collect();
        let info = ReferenceInfo { method: "initial state".into(), dt: None, levels: 0, estimate: 0.0 };
        return Ok((Trajectory { t: t_grid.to_vec(), u: vec![u] }, info));
    }
    let spacing = t_grid[1] - t_grid[0];
    match case.kind {
        ProblemKind::Toy => {
            let scheme = ErkScheme::erk3();
            let solve = |h: f64| micromacro_trajectory(case, 2, &scheme, t_grid, h);
            let dist = |a: &[State], b: &[State]| Ok(Case::sup_distance(a, b));
            let (traj, dt, levels, estimate) = refine(spacing / 4.0, TOY_TOL, false, &solve, &dist)?;
            let info = ReferenceInfo { method: "micro-macro n = 2, ERK3, halving".into(), dt: Some(dt), levels, estimate };
            Ok((traj, info))
        }
        ProblemKind::Conservation => {
            let scheme = ErkScheme::erk3();
            let solve = |h: f64| micromacro_trajectory(case, 1, &scheme, t_grid, h);
            let dist = |a: &[State], b: &[State]| Ok(case.distance(a, b)?.h1.unwrap_or(0.0));
            let (traj, dt, levels, estimate) = refine(spacing / 2.0, CONSERVATION_TOL, true, &solve, &dist)?;
            let info = ReferenceInfo {
                method: "micro-macro n = 1, ERK3, halving with geometric error estimate".into(),
                dt: Some(dt),
                levels,
                estimate,
            };
            Ok((traj, info))
        }
        ProblemKind::Telegraph => {
            let per_block = case
                .blocks
                .iter()
                .map(|b| {
                    let alpha = case.alpha().unwrap_or(crate::problems::telegraph::DEFAULT_ALPHA);
                    let m = TelegraphMode::new(b.k, alpha, case.eps)?;
                    Ok(t_grid.iter().map(|&t| exact_mode_solution(&m, &b.u0, t)).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            let info = ReferenceInfo { method: "exact per-mode propagator".into(), dt: None, levels: 0, estimate: 0.0 };
            Ok((Trajectory::from_blocks(t_grid, per_block), info))
        }
    }
}
