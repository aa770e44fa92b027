//! Pierra's product-space splitting for `max ⟨M, Z⟩` over `S₁ ∩ … ∩ S_J`.
//!
//! The problem is lifted to `J` copies `(Z₁, …, Z_J) ∈ S₁ × … × S_J`
//! constrained to the diagonal subspace `Z₁ = … = Z_J`. Two iterations on this
//! product space are offered:
//!
//! * [`PierraScheme::Averaged`] is the literal prox/average alternation
//!   `B ← mean_j P_j(B + t M)` with `t = ε / (2J)`. It is a fixed-step penalty
//!   scheme: its fixed point is biased by `O(ε)` and only converges to the SDP
//!   optimum as `ε → 0`.
//! * [`PierraScheme::PartialInverse`] (default) is Spingarn's partial-inverse
//!   method on the same product space, i.e. Douglas–Rachford on the pair
//!   (per-component prox, diagonal-space projection). Each sweep costs the same
//!   `J` projections and one average, and its fixed points are exactly the
//!   optima of the SDP for every `ε > 0`.

use serde::{Deserialize, Serialize};

use super::atoms::{final_sweep, ConstraintAtom};
use super::{AtomResidual, SolveReport, Termination};
use crate::error::{invalid, Result};
use crate::linalg::{inner_unchecked, Scalar, SelfAdjoint};
use crate::models::{community_atoms, signed_atoms};

/// Iterations between two convergence checks.
const CHECK_EVERY: usize = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PierraScheme {
    Averaged,
    #[default]
    PartialInverse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PierraConfig {
    /// Objective step weight; `None` picks a scale-free default from `‖M‖_F`.
    pub epsilon: Option<f64>,
    pub max_iters: usize,
    pub feas_tol: f64,
    pub obj_tol: f64,
    pub scheme: PierraScheme,
}

impl Default for PierraConfig {
    fn default() -> Self {
        Self { epsilon: None, max_iters: 50_000, feas_tol: 1e-7, obj_tol: 1e-9, scheme: PierraScheme::default() }
    }
}

impl PierraConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(invalid(format!("epsilon must be positive, got {e}")));
            }
        }
        if !(self.feas_tol > 0.0) || !(self.obj_tol > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        Ok(())
    }

    /// The step weight used for objective `m`.
    ///
    /// The averaged scheme takes `ε = 1/‖M‖_F`. The partial-inverse scheme
    /// takes `ε = 2n/‖M‖_F`, which puts the objective step on the same scale as
    /// the iterates (entries of order one, `‖Z‖_F` of order `n`).
    pub fn epsilon_for<T: Scalar>(&self, m: &SelfAdjoint<T>) -> f64 {
        if let Some(e) = self.epsilon {
            return e;
        }
        let norm = m.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        match self.scheme {
            PierraScheme::Averaged => 1.0 / norm,
            PierraScheme::PartialInverse => 2.0 * m.dim() as f64 / norm,
        }
    }
}

/// Product-space iterate, reusable as a warm start for a related problem.
#[derive(Clone, Debug)]
pub struct PierraState<T: Scalar> {
    components: Vec<SelfAdjoint<T>>,
}

impl<T: Scalar> PierraState<T> {
    pub fn zeros(n: usize, j: usize) -> Self {
        Self { components: vec![SelfAdjoint::zeros(n); j] }
    }

    fn mean(&self) -> SelfAdjoint<T> {
        mean(&self.components)
    }
}

fn mean<T: Scalar>(ms: &[SelfAdjoint<T>]) -> SelfAdjoint<T> {
    let inv = 1.0 / ms.len() as f64;
    let mut acc = ms[0].scale(inv);
    for m in &ms[1..] {
        acc = acc.add_scaled(inv, m);
    }
    acc
}

/// Maximizes `⟨M, Z⟩` over the intersection of `atoms`, starting from zero.
///
/// Convergence is declared when, at a check, the projected estimate has every
/// atom residual `≤ feas_tol` and its objective moved by at most `obj_tol`
/// (relative) since the previous check. The returned matrix is the estimate
/// after a final sweep of all projections with PSD last; hitting `max_iters`
/// is reported through [`Termination::MaxIters`], not as an error.
pub fn pierra_solve<T: Scalar>(
    objective: &SelfAdjoint<T>,
    atoms: &[ConstraintAtom<T>],
    config: &PierraConfig,
) -> Result<(SelfAdjoint<T>, SolveReport)> {
    let (z, report, _) = pierra_solve_from(objective, atoms, config, None)?;
    Ok((z, report))
}

/// [`pierra_solve`] with an optional warm start; also returns the final
/// product-space state.
pub fn pierra_solve_from<T: Scalar>(
    objective: &SelfAdjoint<T>,
    atoms: &[ConstraintAtom<T>],
    config: &PierraConfig,
    warm: Option<&PierraState<T>>,
) -> Result<(SelfAdjoint<T>, SolveReport, PierraState<T>)> {
    config.validate()?;
    if atoms.is_empty() {
        return Err(invalid("at least one constraint atom is required"));
    }
    if objective.as_matrix().iter().any(|x| !x.is_finite()) {
        return Err(invalid("objective has non-finite entries"));
    }
    let n = objective.dim();
    let j = atoms.len();
    let mut state = match warm {
        Some(s) if s.components.len() == j && s.components[0].dim() == n => s.clone(),
        Some(_) => return Err(invalid("warm start does not match the problem shape")),
        None => PierraState::zeros(n, j),
    };
    let epsilon = config.epsilon_for(objective);
    let step = epsilon / (2.0 * j as f64);

    let mut trace = Vec::new();
    let mut last_check_obj: Option<f64> = None;
    let mut termination = Termination::MaxIters;
    let mut iterations = config.max_iters;
    // Latest primal estimate: the average of the projected components.
    let mut estimate = state.mean();

    for it in 1..=config.max_iters {
        match config.scheme {
            PierraScheme::Averaged => {
                let b = state.mean().add_scaled(step, objective);
                let projected: Vec<_> = atoms.iter().map(|a| a.project(&b)).collect::<Result<_>>()?;
                let avg = mean(&projected);
                state.components = vec![avg.clone(); j];
                estimate = avg;
            }
            PierraScheme::PartialInverse => {
                let x = state.mean();
                let reflected = x.scale(2.0).add_scaled(step, objective);
                let mut projected = Vec::with_capacity(j);
                for (atom, y) in atoms.iter().zip(&state.components) {
                    let z = atom.project(&(&reflected - y))?;
                    projected.push(z);
                }
                for (y, z) in state.components.iter_mut().zip(&projected) {
                    *y = y.add_scaled(1.0, z).add_scaled(-1.0, &x);
                }
                estimate = mean(&projected);
            }
        }
        let obj = inner_unchecked(objective, &estimate);
        if !obj.is_finite() {
            return Err(invalid("iteration diverged to non-finite values"));
        }
        trace.push(obj);

        if it % CHECK_EVERY == 0 {
            let swept = final_sweep(atoms, &estimate)?;
            let feasible = atoms.iter().try_fold(true, |ok, a| Ok::<_, crate::Error>(ok && a.residual(&swept)? <= config.feas_tol))?;
            let swept_obj = inner_unchecked(objective, &swept);
            let stalled = last_check_obj
                .is_some_and(|prev| (swept_obj - prev).abs() <= config.obj_tol * swept_obj.abs().max(1.0));
            last_check_obj = Some(swept_obj);
            if feasible && stalled {
                termination = Termination::Converged;
                iterations = it;
                break;
            }
        }
    }

    let z = final_sweep(atoms, &estimate)?;
    let residuals = atoms
        .iter()
        .map(|a| Ok(AtomResidual { atom: a.name().to_string(), residual: a.residual(&z)? }))
        .collect::<Result<_>>()?;
    let report = SolveReport {
        solver: "pierra".into(),
        iterations,
        objective: inner_unchecked(objective, &z),
        objective_trace: trace,
        residuals,
        termination,
        epsilon: Some(epsilon),
        rank: None,
        gradient_norm: None,
    };
    Ok((z, report, state))
}

/// Community detection: `max ⟨A, Z⟩` over
/// `{Z ⪰ 0, Z ≥ 0, diag(Z) ≤ 1, Σ Z_ij ≤ λ}`.
pub fn pierra_community(
    a: &SelfAdjoint<f64>,
    lambda: f64,
    config: &PierraConfig,
) -> Result<(SelfAdjoint<f64>, SolveReport)> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    pierra_solve(a, &community_atoms(lambda), config)
}

/// Signed clustering with known `α`: `max ⟨A − αJ, Z⟩` over
/// `{Z ⪰ 0, 0 ≤ Z ≤ 1, diag(Z) = 1}`.
pub fn pierra_signed(
    a: &SelfAdjoint<f64>,
    alpha: f64,
    config: &PierraConfig,
) -> Result<(SelfAdjoint<f64>, SolveReport)> {
    let m = a.map(|x| x - alpha);
    pierra_solve(&m, &signed_atoms(), config)
}
