//! References, sweeps, slope fits and experiments.

pub mod case;
pub mod check;
pub mod config;
pub mod experiment;
pub mod fit;
pub mod reference;
pub mod sweep;

pub use case::{uniform_grid, Block, Case, Norms};
pub use config::{DataKind, NormKind, ProblemBlock, ProblemKind, RunConfig, SolveMode, SweepConfig};
pub use reference::{compute_reference, direct_trajectory, micromacro_trajectory, ReferenceInfo, Trajectory};
pub use fit::{fit_order, fit_uniform, per_eps_curves, uniform_envelope, OrderFit};
pub use sweep::{run_sweep, summarize_sweep, write_sweep, SweepSummary, NormFit, CellFailure, ErrorRecord, SweepOutput};
pub use experiment::{micro_profile, run_experiment, ExperimentName, ExperimentReport, Gate, MicroProfile};
pub use check::{run_checks, Suite};
