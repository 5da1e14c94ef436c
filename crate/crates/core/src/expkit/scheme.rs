use serde::{Deserialize, Serialize};

use super::phi::PhiEvaluator;
use crate::error::{Error, Result};
use crate::state::{re, State, C64};

/// A system `u' = -L u + N(t, u)` with `L` diagonal, real and nonnegative.
pub trait SplitOde {
    fn dim(&self) -> usize;
    fn stiff_diag(&self) -> &[f64];
    fn nonstiff(&self, t: f64, u: &State) -> Result<State>;
}

/// Weights `(w1, w2, w3)` of a combination `w1 φ_1 + w2 φ_2 + w3 φ_3`.
pub type PhiWeights = [f64; 3];

/// An explicit exponential Runge-Kutta tableau.
///
/// Stage `i` is `U_i = e^{-c_i hL} u_0 + h Σ_j a_ij(-c_i hL) N(t + c_i h, U_j)` with
/// `a_ij(z) = Σ_k w_k φ_k(z)`; the update uses `b_i(-hL)` in the same way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErkScheme {
    pub order: usize,
    pub label: String,
    pub c: Vec<f64>,
    pub a: Vec<Vec<PhiWeights>>,
    pub b: Vec<PhiWeights>,
}

impl ErkScheme {
    /// Exponential Euler.
    pub fn exp_euler() -> Self {
        ErkScheme {
            order: 1,
            label: "ERK1".into(),
            c: vec![0.0],
            a: vec![vec![]],
            b: vec![[1.0, 0.0, 0.0]],
        }
    }

    /// Two-stage scheme reducing to Heun's method:
    /// `c = (0, 1)`, `a21 = φ1`, `b = (φ1 - φ2, φ2)`.
    pub fn erk2() -> Self {
        ErkScheme {
            order: 2,
            label: "ERK2".into(),
            c: vec![0.0, 1.0],
            a: vec![vec![], vec![[1.0, 0.0, 0.0]]],
            b: vec![[1.0, -1.0, 0.0], [0.0, 1.0, 0.0]],
        }
    }

    /// Three-stage scheme reducing to Heun's third-order method:
    /// `c = (0, 1/3, 2/3)`, `a21 = φ1/3`, `a31 = 2φ1/3 - 4φ2/3`, `a32 = 4φ2/3`,
    /// `b = (φ1 - 3φ2/2, 0, 3φ2/2)`.
    pub fn erk3() -> Self {
        ErkScheme {
            order: 3,
            label: "ERK3".into(),
            c: vec![0.0, 1.0 / 3.0, 2.0 / 3.0],
            a: vec![
                vec![],
                vec![[1.0 / 3.0, 0.0, 0.0]],
                vec![[2.0 / 3.0, -4.0 / 3.0, 0.0], [0.0, 4.0 / 3.0, 0.0]],
            ],
            b: vec![[1.0, -1.5, 0.0], [0.0, 0.0, 0.0], [0.0, 1.5, 0.0]],
        }
    }

    /// The scheme of the given order (1, 2 or 3).
    pub fn of_order(q: usize) -> Result<Self> {
        match q {
            1 => Ok(Self::exp_euler()),
            2 => Ok(Self::erk2()),
            3 => Ok(Self::erk3()),
            _ => Err(Error::InvalidParameter(format!("no exponential scheme of order {q}"))),
        }
    }

    pub fn stages(&self) -> usize {
        self.c.len()
    }

    /// Coefficients of the classical Runge-Kutta scheme obtained for `L = 0`.
    pub fn classical_tableau(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let at0 = |w: &PhiWeights| w[0] + w[1] / 2.0 + w[2] / 6.0;
        (
            self.a.iter().map(|row| row.iter().map(at0).collect()).collect(),
            self.b.iter().map(at0).collect(),
        )
    }
}

/// Coefficients of a scheme precomputed for one step size and one stiff diagonal.
#[derive(Debug, Clone)]
pub struct ErkStepper {
    h: f64,
    c: Vec<f64>,
    exp_c: Vec<Vec<f64>>,
    a: Vec<Vec<Option<Vec<f64>>>>,
    exp_h: Vec<f64>,
    b: Vec<Option<Vec<f64>>>,
}

fn combo(phis: &[[C64; 4]], w: &PhiWeights) -> Option<Vec<f64>> {
    if w.iter().all(|&x| x == 0.0) {
        return None;
    }
    Some(phis.iter().map(|p| w[0] * p[1].re + w[1] * p[2].re + w[2] * p[3].re).collect())
}

impl ErkStepper {
    pub fn new(scheme: &ErkScheme, stiff: &[f64], h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size must be positive, got {h}")));
        }
        if let Some(l) = stiff.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(Error::InvalidParameter(format!("stiff entries must be finite and >= 0, got {l}")));
        }
        let ev = PhiEvaluator::default();
        let table = |c: f64| -> Vec<[C64; 4]> { stiff.iter().map(|&l| ev.eval_all(re(-c * h * l))).collect() };
        let mut exp_c = Vec::with_capacity(scheme.stages());
        let mut a = Vec::with_capacity(scheme.stages());
        for (i, &ci) in scheme.c.iter().enumerate() {
            let t = table(ci);
            exp_c.push(t.iter().map(|p| p[0].re).collect());
            a.push(scheme.a[i].iter().map(|w| combo(&t, w)).collect());
        }
        let t1 = table(1.0);
        Ok(ErkStepper {
            h,
            c: scheme.c.clone(),
            exp_c,
            a,
            exp_h: t1.iter().map(|p| p[0].re).collect(),
            b: scheme.b.iter().map(|w| combo(&t1, w)).collect(),
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// One step from `(t, u)`.
    pub fn step(&self, sys: &dyn SplitOde, t: f64, u: &State) -> Result<State> {
        let d = u.dim();
        if d != self.exp_h.len() || sys.dim() != d {
            return Err(Error::Dimension { expected: self.exp_h.len(), got: d });
        }
        let h = self.h;
        let mut ns: Vec<State> = Vec::with_capacity(self.c.len());
        for (i, ci) in self.c.iter().enumerate() {
            let ui = if i == 0 {
                u.clone()
            } else {
                let mut ui = State(u.iter().zip(&self.exp_c[i]).map(|(x, e)| x * e).collect());
                for (j, aij) in self.a[i].iter().enumerate() {
                    if let Some(aij) = aij {
                        for ((s, n), w) in ui.iter_mut().zip(ns[j].iter()).zip(aij) {
                            *s += n * (h * w);
                        }
                    }
                }
                ui
            };
            if !ui.is_finite() {
                return Err(Error::StepFailure { t, stage: i });
            }
            let n = sys.nonstiff(t + ci * h, &ui)?;
            if !n.is_finite() {
                return Err(Error::StepFailure { t, stage: i });
            }
            ns.push(n);
        }
        let mut out = State(u.iter().zip(&self.exp_h).map(|(x, e)| x * e).collect());
        for (bi, n) in self.b.iter().zip(&ns) {
            if let Some(bi) = bi {
                for ((s, n), w) in out.iter_mut().zip(n.iter()).zip(bi) {
                    *s += n * (h * w);
                }
            }
        }
        if !out.is_finite() {
            return Err(Error::StepFailure { t, stage: self.c.len() });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_limits() {
        let (a, b) = ErkScheme::erk2().classical_tableau();
        assert_eq!(a[1], vec![1.0]);
        assert_eq!(b, vec![0.5, 0.5]);
        let (a, b) = ErkScheme::erk3().classical_tableau();
        assert!((a[1][0] - 1.0 / 3.0).abs() < 1e-16);
        assert!(a[2][0].abs() < 1e-16 && (a[2][1] - 2.0 / 3.0).abs() < 1e-16);
        assert!((b[0] - 0.25).abs() < 1e-16 && b[1] == 0.0 && (b[2] - 0.75).abs() < 1e-16);
        for q in 1..=3 {
            let s = ErkScheme::of_order(q).unwrap();
            assert!(s.stages() >= s.order);
            let (a, b) = s.classical_tableau();
            assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            for (i, row) in a.iter().enumerate() {
                assert!((row.iter().sum::<f64>() - s.c[i]).abs() < 1e-15);
            }
        }
        assert!(ErkScheme::of_order(4).is_err());
    }

    #[test]
    fn rejects_bad_step() {
        assert!(ErkStepper::new(&ErkScheme::erk2(), &[1.0], 0.0).is_err());
        assert!(ErkStepper::new(&ErkScheme::erk2(), &[-1.0], 0.1).is_err());
    }
}
