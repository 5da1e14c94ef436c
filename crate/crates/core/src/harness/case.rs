//! A problem instance at fixed `eps`, split into independent blocks.
//!
//! The toy problem and the conservation law are single blocks; the telegraph equation is one
//! 2-dimensional block per Fourier mode.

use crate::error::Result;
use crate::micromacro::Decomposition;
use crate::problem::{modified_norm, SemilinearProblem};
use crate::problems::conservation::{conservation_decomposition, ConservationLaw};
use crate::problems::telegraph::{self, telegraph_decomposition, TelegraphData, TelegraphField};
use crate::problems::toy;
use crate::state::State;

use super::config::{DataKind, ProblemBlock, ProblemKind};

#[derive(Debug, Clone)]
pub struct Block {
    pub problem: SemilinearProblem,
    pub u0: State,
    /// Fourier mode for telegraph blocks, 0 otherwise.
    pub k: i32,
}

#[derive(Debug, Clone)]
enum Shape {
    Toy,
    Telegraph { kmax: usize, alpha: f64 },
    Conservation(ConservationLaw),
}

#[derive(Debug, Clone)]
pub struct Case {
    pub kind: ProblemKind,
    pub eps: f64,
    pub blocks: Vec<Block>,
    shape: Shape,
}

/// Errors of one comparison in the recorded norms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Norms {
    pub abs: f64,
    pub modified: f64,
    pub h1: Option<f64>,
    /// Unscaled `H¹` norm; equal to `h1` for the telegraph equation.
    pub h1_abs: Option<f64>,
}

impl Norms {
    pub fn max(self, o: Norms) -> Norms {
        Norms {
            abs: self.abs.max(o.abs),
            modified: self.modified.max(o.modified),
            h1: match (self.h1, o.h1) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
            h1_abs: match (self.h1_abs, o.h1_abs) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
        }
    }
}

impl Case {
    pub fn new(block: &ProblemBlock, eps: f64) -> Result<Case> {
        block.validate()?;
        let kind = block.problem;
        match kind {
            ProblemKind::Toy => {
                let u0 = match block.data {
                    DataKind::Standard => toy::initial_state(),
                    DataKind::NearEquilibrium => toy::initial_state_equilibrium(),
                };
                Ok(Case { kind, eps, blocks: vec![Block { problem: toy::problem(), u0, k: 0 }], shape: Shape::Toy })
            }
            ProblemKind::Telegraph => {
                let (kmax, alpha) = (block.kmax(), block.alpha());
                let data = match block.data {
                    DataKind::Standard => TelegraphData::Standard,
                    DataKind::NearEquilibrium => TelegraphData::NearEquilibrium,
                };
                let field = TelegraphField::new(kmax, alpha, data);
                let blocks = field
                    .modes()
                    .map(|k| {
                        Ok(Block {
                            problem: telegraph::telegraph_mode_problem(k, alpha, eps)?,
                            u0: field.initial_mode(k, eps)?,
                            k,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Case { kind, eps, blocks, shape: Shape::Telegraph { kmax, alpha } })
            }
            ProblemKind::Conservation => {
                let law = ConservationLaw::new(block.n_grid(), block.b(), block.include_viscosity())?;
                let blocks = vec![Block { problem: law.problem(), u0: law.initial_state(), k: 0 }];
                Ok(Case { kind, eps, blocks, shape: Shape::Conservation(law) })
            }
        }
    }

    /// Decomposition of order `n` for block `i`.
    pub fn decomposition(&self, i: usize, n: usize) -> Result<Decomposition> {
        match &self.shape {
            Shape::Toy => toy::toy_decomposition(n, self.eps),
            Shape::Telegraph { alpha, .. } => telegraph_decomposition(self.blocks[i].k, *alpha, self.eps, n),
            Shape::Conservation(law) => conservation_decomposition(law, self.eps, n),
        }
    }

    /// Telegraph `α`.
    pub fn alpha(&self) -> Option<f64> {
        match &self.shape {
            Shape::Telegraph { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn law(&self) -> Option<&ConservationLaw> {
        match &self.shape {
            Shape::Conservation(law) => Some(law),
            _ => None,
        }
    }

    /// Norms of a per-block difference.
    ///
    /// `h1` is the spectral `H¹` norm of `(ρ, j)` for the telegraph equation and the modified
    /// discrete `H¹` norm for the conservation law.
    pub fn norms(&self, e: &[State]) -> Result<Norms> {
        let abs = e.iter().map(|x| x.norm().powi(2)).sum::<f64>().sqrt();
        let modified = self
            .blocks
            .iter()
            .zip(e)
            .map(|(b, x)| modified_norm(self.eps, b.problem.lambda(), x).powi(2))
            .sum::<f64>()
            .sqrt();
        let (h1, h1_abs) = match &self.shape {
            Shape::Toy => (None, None),
            Shape::Telegraph { kmax, alpha } => {
                let (rho, j) = telegraph::mode_densities(*kmax, *alpha, self.eps, e)?;
                let h = telegraph::h1_norm(*kmax, &rho, &j);
                (Some(h), Some(h))
            }
            Shape::Conservation(law) => (Some(law.h1_modified_norm(self.eps, &e[0])), Some(law.h1_norm(&e[0]))),
        };
        Ok(Norms { abs, modified, h1, h1_abs })
    }

    /// Norms of `a - b`.
    pub fn distance(&self, a: &[State], b: &[State]) -> Result<Norms> {
        let e: Vec<State> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norms(&e)
    }

    /// Largest entry in modulus over all blocks.
    pub fn sup_distance(a: &[State], b: &[State]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).max_abs()).fold(0.0, f64::max)
    }
}

/// Uniform grid `0, dt, ..., T`; `dt` must divide `T`.
pub fn uniform_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let steps = (t_end / dt).round() as usize;
    (0..=steps).map(|i| i as f64 * dt).collect()
}
