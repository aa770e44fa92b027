//! SDP solvers: projection splitting over constraint atoms and the
//! Burer–Monteiro factorization for the elliptope.

pub mod atoms;
pub mod bm;
pub mod pierra;

use serde::{Deserialize, Serialize};

pub use atoms::{final_sweep, max_residual, ConstraintAtom};
pub use bm::{bm_rank, bm_solve, BmConfig, BmSolution, Sense};
pub use pierra::{
    pierra_community, pierra_signed, pierra_solve, pierra_solve_from, PierraConfig, PierraScheme, PierraState,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomResidual {
    pub atom: String,
    /// `‖P(Ẑ) − Ẑ‖_F / (1 + ‖Ẑ‖_F)`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: String,
    pub iterations: usize,
    /// `⟨M, Ẑ⟩` at the returned point.
    pub objective: f64,
    pub objective_trace: Vec<f64>,
    pub residuals: Vec<AtomResidual>,
    pub termination: Termination,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradient_norm: Option<f64>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.residual))
    }
}
