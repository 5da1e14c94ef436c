//! φ-functions and explicit exponential Runge-Kutta schemes for diagonal stiff parts.

mod integrate;
mod phi;
mod scheme;

pub use integrate::{erk_step, integrate, integrate_split, substeps};
pub use phi::{phi, PhiEvaluator};
pub use scheme::{ErkScheme, ErkStepper, SplitOde};
