use super::scheme::{ErkScheme, ErkStepper, SplitOde};
use crate::error::{Error, Result};
use crate::problem::{check_eps, SemilinearProblem};
use crate::state::State;

/// One exponential Runge-Kutta step of the original stiff problem.
pub fn erk_step(
    scheme: &ErkScheme,
    problem: &SemilinearProblem,
    eps: f64,
    t: f64,
    u: &State,
    h: f64,
) -> Result<State> {
    check_eps(eps)?;
    problem.check_dim(u)?;
    let sys = problem.direct_system(eps);
    ErkStepper::new(scheme, sys.stiff_diag(), h)?.step(&sys, t, u)
}

/// Number of uniform substeps needed to cover `len` with steps no longer than `max_step`.
pub fn substeps(len: f64, max_step: f64) -> usize {
    if !max_step.is_finite() || len <= max_step {
        return 1;
    }
    let n = len / max_step;
    // tolerate round-off when len is an exact multiple of max_step
    let r = n.round();
    if (n - r).abs() <= 1e-9 * n {
        r as usize
    } else {
        n.ceil() as usize
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        Some(&0.0) => {}
        _ => return Err(Error::InvalidParameter("time grid must start at 0".into())),
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidParameter("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// States of a split system at every grid point, stepping each interval uniformly with
/// steps of length at most `max_step` (pass `f64::INFINITY` to step exactly on the grid).
pub fn integrate_split(
    scheme: &ErkScheme,
    sys: &dyn SplitOde,
    u0: &State,
    t_grid: &[f64],
    max_step: f64,
) -> Result<Vec<State>> {
    check_grid(t_grid)?;
    if u0.dim() != sys.dim() {
        return Err(Error::Dimension { expected: sys.dim(), got: u0.dim() });
    }
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(u0.clone());
    let mut u = u0.clone();
    let mut stepper: Option<ErkStepper> = None;
    for w in t_grid.windows(2) {
        let len = w[1] - w[0];
        let m = substeps(len, max_step);
        let h = len / m as f64;
        if stepper.as_ref().is_none_or(|s| s.h() != h) {
            stepper = Some(ErkStepper::new(scheme, sys.stiff_diag(), h)?);
        }
        let st = stepper.as_ref().expect("stepper initialised");
        for i in 0..m {
            u = st.step(sys, w[0] + i as f64 * h, &u)?;
        }
        out.push(u.clone());
    }
    Ok(out)
}

/// Direct integration of the original stiff problem over `t_grid`.
pub fn integrate(
    scheme: &ErkScheme,
    problem: &SemilinearProblem,
    eps: f64,
    u0: &State,
    t_grid: &[f64],
    max_step: f64,
) -> Result<Vec<State>> {
    check_eps(eps)?;
    problem.check_dim(u0)?;
    integrate_split(scheme, &problem.direct_system(eps), u0, t_grid, max_step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substep_counts() {
        assert_eq!(substeps(1.0, f64::INFINITY), 1);
        assert_eq!(substeps(1.0, 0.25), 4);
        assert_eq!(substeps(1.0, 0.3), 4);
        assert_eq!(substeps(0.3, 0.1), 3);
        assert_eq!(substeps(0.1, 0.5), 1);
    }

    #[test]
    fn grid_validation() {
        struct Zero;
        impl SplitOde for Zero {
            fn dim(&self) -> usize {
                1
            }
            fn stiff_diag(&self) -> &[f64] {
                &[0.0]
            }
            fn nonstiff(&self, _t: f64, u: &State) -> Result<State> {
                Ok(State::zeros(u.dim()))
            }
        }
        let s = ErkScheme::erk2();
        let u = State::from_real(&[1.0]);
        assert!(integrate_split(&s, &Zero, &u, &[], 0.1).is_err());
        assert!(integrate_split(&s, &Zero, &u, &[0.1, 0.2], 0.1).is_err());
        assert!(integrate_split(&s, &Zero, &u, &[0.0, 0.2, 0.2], 0.1).is_err());
        assert_eq!(integrate_split(&s, &Zero, &u, &[0.0], 0.1).unwrap(), vec![u]);
    }
}
