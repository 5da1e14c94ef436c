//! Uniformly accurate time integration of stiff dissipative systems
//! `u' = -(1/eps) Λ u + f(u)`.
//!
//! The solution is split as `u(t) = Ω_{t/eps}(v(t)) + w(t)` where the macro part `v`
//! follows a slow non-stiff field and the micro part `w` stays small. Both are advanced
//! with explicit exponential Runge-Kutta schemes, which gives errors bounded by
//! `C dt^q` with `C` independent of `eps`.
//!
//! Modules:
//! - [`problem`], [`state`]: problem type, complex states, norms.
//! - [`expkit`]: φ-functions and exponential Runge-Kutta steppers.
//! - [`autoderive`]: symbolic averaging for polynomial fields, producing decompositions.
//! - [`micromacro`]: the coupled micro-macro system, initial data and diagnostics.
//! - [`problems`]: toy oscillator, telegraph equation, relaxed conservation law.
//! - [`harness`]: references, sweeps, slope fits and experiments.

pub mod autoderive;
pub mod error;
pub mod expkit;
pub mod harness;
pub mod micromacro;
pub mod problem;
pub mod problems;
pub mod state;

pub use error::{Error, Result};
pub use problem::{modified_norm, SemilinearProblem};
pub use state::{State, C64};
