//! Symbolic averaging for polynomial vector fields.
//!
//! Maps are stored as sparse sums `Σ c ε^m e^{ijθ} u^α`. The averaging recurrence builds the
//! near-identity changes of variable `Φ^[n]`, the averaged field `G^[n]` and the defect
//! `δ^[n]`; shifting by `e^{iθΛ}` and reading `e^{ijθ}` as `e^{-jτ}` turns them into the
//! dissipative maps `Ω`, `F`, `η`.

mod averaging;
mod dissipative;
mod series;

pub use averaging::{
    average, compose, compose_with, derive_averaging, jacobian_apply, lift_to_g, make_g_delta, next_phi,
    operator_t, relative_average, Averaging,
};
pub use dissipative::{
    derive_decomposition, from_averaging, negative_modes, shift_map, to_dissipative, AutoDecomposition,
    DissipativeSet,
};
pub use series::{EpsModePolyMap, Exps, Limits, ModeConvention, PolyVectorField, Series, TermKey, TermRecord};
