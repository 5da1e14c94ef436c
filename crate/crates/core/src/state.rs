//! Complex state vectors.
//!
//! Every problem is integrated in complex arithmetic; real problems embed with a zero
//! imaginary part so that the per-mode telegraph systems share the same code path.

use std::ops::{Add, AddAssign, Deref, DerefMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

/// Shorthand for a real complex number.
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A point `u = (x, z)` of the phase space.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct State(pub Vec<C64>);

impl State {
    pub fn zeros(d: usize) -> Self {
        State(vec![C64::new(0.0, 0.0); d])
    }

    pub fn from_real(xs: &[f64]) -> Self {
        State(xs.iter().map(|&x| re(x)).collect())
    }

    pub fn from_vec(v: Vec<C64>) -> Self {
        State(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    /// Euclidean norm on `C^d`.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part in modulus.
    pub fn max_imag(&self) -> f64 {
        self.0.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.re).collect()
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: C64, x: &State) {
        debug_assert_eq!(self.dim(), x.dim());
        for (s, xi) in self.0.iter_mut().zip(&x.0) {
            *s += a * xi;
        }
    }

    pub fn scale(mut self, a: C64) -> Self {
        for s in &mut self.0 {
            *s *= a;
        }
        self
    }

    /// Concatenate two states, e.g. a macro and a micro part.
    pub fn concat(a: &State, b: &State) -> State {
        let mut v = Vec::with_capacity(a.dim() + b.dim());
        v.extend_from_slice(&a.0);
        v.extend_from_slice(&b.0);
        State(v)
    }

    pub fn split_at(&self, mid: usize) -> (State, State) {
        (State(self.0[..mid].to_vec()), State(self.0[mid..].to_vec()))
    }
}

impl Deref for State {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl DerefMut for State {
    fn deref_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }
}

impl From<Vec<C64>> for State {
    fn from(v: Vec<C64>) -> Self {
        State(v)
    }
}

impl Add<&State> for &State {
    type Output = State;
    fn add(self, rhs: &State) -> State {
        debug_assert_eq!(self.dim(), rhs.dim());
        State(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub<&State> for &State {
    type Output = State;
    fn sub(self, rhs: &State) -> State {
        debug_assert_eq!(self.dim(), rhs.dim());
        State(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for State {
    type Output = State;
    fn add(mut self, rhs: State) -> State {
        self += &rhs;
        self
    }
}

impl Sub for State {
    type Output = State;
    fn sub(mut self, rhs: State) -> State {
        self -= &rhs;
        self
    }
}

impl AddAssign<&State> for State {
    fn add_assign(&mut self, rhs: &State) {
        debug_assert_eq!(self.dim(), rhs.dim());
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl SubAssign<&State> for State {
    fn sub_assign(&mut self, rhs: &State) {
        debug_assert_eq!(self.dim(), rhs.dim());
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a -= b;
        }
    }
}

impl Mul<f64> for &State {
    type Output = State;
    fn mul(self, rhs: f64) -> State {
        State(self.0.iter().map(|a| a * rhs).collect())
    }
}

impl Mul<f64> for State {
    type Output = State;
    fn mul(self, rhs: f64) -> State {
        self.scale(re(rhs))
    }
}

impl Neg for State {
    type Output = State;
    fn neg(self) -> State {
        State(self.0.into_iter().map(|a| -a).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_and_ops() {
        let a = State::from_real(&[3.0, 4.0]);
        assert_eq!(a.norm(), 5.0);
        let b = &a - &a;
        assert_eq!(b.norm(), 0.0);
        let mut c = a.clone();
        c.axpy(re(2.0), &a);
        assert_eq!(c, State::from_real(&[9.0, 12.0]));
        let (x, z) = State::concat(&a, &c).split_at(2);
        assert_eq!(x, a);
        assert_eq!(z, c);
    }
}
