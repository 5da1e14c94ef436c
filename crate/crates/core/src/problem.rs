//! The semilinear problem `u' = -(1/eps) Λ u + f(u)` shared by every solver.

use std::fmt;
use std::sync::Arc;

use crate::autoderive::PolyVectorField;
use crate::error::{Error, Result};
use crate::expkit::SplitOde;
use crate::state::{re, State};

pub type VectorField = Arc<dyn Fn(&State) -> State + Send + Sync>;
/// `(base, inc) -> f(base + inc) - f(base)`, evaluated without cancellation.
pub type DiffField = Arc<dyn Fn(&State, &State) -> State + Send + Sync>;

/// A stiff dissipative system with diagonal integer stiff part.
///
/// `eps` is never stored: one instance serves a whole sweep over the stiffness parameter.
#[derive(Clone)]
pub struct SemilinearProblem {
    label: String,
    d_x: usize,
    lambda: Vec<u32>,
    f: VectorField,
    f_diff: DiffField,
    poly: Option<Arc<PolyVectorField>>,
}

impl fmt::Debug for SemilinearProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemilinearProblem")
            .field("label", &self.label)
            .field("d_x", &self.d_x)
            .field("lambda", &self.lambda)
            .field("polynomial", &self.poly.is_some())
            .finish()
    }
}

impl SemilinearProblem {
    /// Build a problem. The first `d_x` entries of `lambda` must be zero and the
    /// remaining ones positive.
    pub fn new(
        label: impl Into<String>,
        d_x: usize,
        lambda: Vec<u32>,
        f: VectorField,
        f_diff: DiffField,
    ) -> Result<Self> {
        if d_x >= lambda.len() {
            return Err(Error::InvalidParameter(format!(
                "need at least one fast component (d_x = {d_x}, d = {})",
                lambda.len()
            )));
        }
        if let Some(i) = lambda[..d_x].iter().position(|&l| l != 0) {
            return Err(Error::InvalidParameter(format!("lambda[{i}] must be 0 on the slow block")));
        }
        if let Some(i) = lambda[d_x..].iter().position(|&l| l == 0) {
            return Err(Error::InvalidParameter(format!(
                "lambda[{}] must be a positive integer on the fast block",
                d_x + i
            )));
        }
        Ok(SemilinearProblem { label: label.into(), d_x, lambda, f, f_diff, poly: None })
    }

    /// Build a problem whose nonlinearity is a polynomial vector field.
    pub fn from_polynomial(
        label: impl Into<String>,
        d_x: usize,
        lambda: Vec<u32>,
        poly: PolyVectorField,
    ) -> Result<Self> {
        if poly.dim() != lambda.len() {
            return Err(Error::Dimension { expected: lambda.len(), got: poly.dim() });
        }
        let poly = Arc::new(poly);
        let pf = poly.clone();
        let pd = poly.clone();
        let mut p = Self::new(
            label,
            d_x,
            lambda,
            Arc::new(move |u| pf.eval(u)),
            Arc::new(move |b, i| pd.eval_diff(b, i)),
        )?;
        p.poly = Some(poly);
        Ok(p)
    }

    /// Attach the polynomial form of `f` used by the symbolic engine.
    pub fn with_polynomial(mut self, poly: PolyVectorField) -> Result<Self> {
        if poly.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: poly.dim() });
        }
        self.poly = Some(Arc::new(poly));
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn d_x(&self) -> usize {
        self.d_x
    }

    pub fn d_z(&self) -> usize {
        self.lambda.len() - self.d_x
    }

    pub fn lambda(&self) -> &[u32] {
        &self.lambda
    }

    pub fn polynomial(&self) -> Option<&PolyVectorField> {
        self.poly.as_deref()
    }

    pub fn f(&self, u: &State) -> State {
        (self.f)(u)
    }

    pub fn f_diff(&self, base: &State, inc: &State) -> State {
        (self.f_diff)(base, inc)
    }

    /// Diagonal of `Λ / eps`.
    pub fn stiff_diag(&self, eps: f64) -> Vec<f64> {
        self.lambda.iter().map(|&l| l as f64 / eps).collect()
    }

    /// Right-hand side `-(1/eps) Λ u + f(u)`.
    pub fn eval_rhs(&self, eps: f64, u: &State) -> Result<State> {
        check_eps(eps)?;
        self.check_dim(u)?;
        let mut out = self.f(u);
        for ((o, ui), &l) in out.iter_mut().zip(u.iter()).zip(&self.lambda) {
            if l != 0 {
                *o -= ui * (l as f64 / eps);
            }
        }
        if !out.is_finite() {
            return Err(Error::NonFinite { context: format!("rhs of {}", self.label) });
        }
        Ok(out)
    }

    pub fn check_dim(&self, u: &State) -> Result<()> {
        if u.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: u.dim() });
        }
        Ok(())
    }

    /// View as a split system for the exponential integrators (direct solve).
    pub fn direct_system(&self, eps: f64) -> DirectSystem<'_> {
        DirectSystem { problem: self, stiff: self.stiff_diag(eps) }
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// The original stiff problem seen as `u' = -L u + N(u)` with `L = Λ/eps`, `N = f`.
pub struct DirectSystem<'a> {
    problem: &'a SemilinearProblem,
    stiff: Vec<f64>,
}

impl SplitOde for DirectSystem<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn stiff_diag(&self) -> &[f64] {
        &self.stiff
    }

    fn nonstiff(&self, _t: f64, u: &State) -> Result<State> {
        Ok(self.problem.f(u))
    }
}

/// The modified norm `|u + (1/eps) Λ u|`.
pub fn modified_norm(eps: f64, lambda: &[u32], u: &State) -> f64 {
    debug_assert_eq!(lambda.len(), u.dim());
    u.iter()
        .zip(lambda)
        .map(|(c, &l)| (c * re(1.0 + l as f64 / eps)).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> SemilinearProblem {
        crate::problems::toy::problem()
    }

    #[test]
    fn rhs_toy_values() {
        let p = toy();
        let u = State::from_real(&[0.1, 0.7, 0.05]);
        let r = p.eval_rhs(1.0, &u).unwrap();
        let expect = [-0.665, 0.095, 0.0049 - 0.05];
        for (a, b) in r.iter().zip(expect) {
            assert!((a.re - b).abs() < 1e-15 && a.im == 0.0);
        }
        // f vanishes at (0, 0, 1): both x-rows carry the factor x and the z-row x1 x2
        let r = p.eval_rhs(0.01, &State::from_real(&[0.0, 0.0, 1.0])).unwrap();
        let expect = [0.0, 0.0, -100.0];
        for (a, b) in r.iter().zip(expect) {
            assert!((a.re - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rhs_at_origin_is_f0() {
        let c = State::from_real(&[1.5, -2.0]);
        let cc = c.clone();
        let p = SemilinearProblem::new(
            "const",
            1,
            vec![0, 3],
            Arc::new(move |_| cc.clone()),
            Arc::new(|b, _| State::zeros(b.dim())),
        )
        .unwrap();
        assert_eq!(p.eval_rhs(0.3, &State::zeros(2)).unwrap(), c);
    }

    #[test]
    fn rhs_rejects_bad_input() {
        let p = toy();
        assert!(matches!(p.eval_rhs(0.0, &State::zeros(3)), Err(Error::InvalidParameter(_))));
        assert!(matches!(p.eval_rhs(1.0, &State::zeros(2)), Err(Error::Dimension { .. })));
        let u = State::from_real(&[f64::NAN, 0.0, 0.0]);
        assert!(matches!(p.eval_rhs(1.0, &u), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn lambda_block_structure_enforced() {
        let f: VectorField = Arc::new(|u| u.clone());
        let fd: DiffField = Arc::new(|_, i| i.clone());
        assert!(SemilinearProblem::new("a", 1, vec![1, 1], f.clone(), fd.clone()).is_err());
        assert!(SemilinearProblem::new("b", 1, vec![0, 0], f.clone(), fd.clone()).is_err());
        assert!(SemilinearProblem::new("c", 2, vec![0, 0], f.clone(), fd.clone()).is_err());
        assert!(SemilinearProblem::new("d", 0, vec![2], f, fd).is_ok());
    }

    #[test]
    fn modified_norm_examples() {
        assert_eq!(modified_norm(0.5, &[0, 1], &State::from_real(&[0.0, 1.0])), 3.0);
        assert_eq!(modified_norm(0.5, &[0, 1], &State::zeros(2)), 0.0);
        assert_eq!(modified_norm(0.01, &[0, 0], &State::from_real(&[3.0, 4.0])), 5.0);
    }
}
