//! Monte Carlo estimate of the localized fixed point
//! `r*(Δ) = inf{r > 0 : P(sup_{Z ∈ C, G(Z* − Z) ≤ r} ⟨A − E A, Z − Z*⟩ ≤ r/2) ≥ 1 − Δ}`.
//!
//! For each replicate and each grid radius the inner supremum is an SDP over
//! `C` intersected with a localization atom, solved by Pierra's method with
//! warm starts along the (nested) radius grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{inner_unchecked, Scalar, SelfAdjoint};
use crate::models::ProblemInstance;
use crate::rng::derive_seed;
use crate::solvers::{pierra_solve_from, ConstraintAtom, PierraConfig, PierraState};

/// One draw of the data together with its exact expectation and oracle.
#[derive(Clone, Debug)]
pub struct Replicate<T: Scalar> {
    /// Observed objective matrix (data minus any known shift).
    pub observed: SelfAdjoint<T>,
    /// Its expectation.
    pub expected: SelfAdjoint<T>,
    pub oracle: SelfAdjoint<T>,
}

impl<T: Scalar> Replicate<T> {
    /// Uses the instance's shifted objective and its oracle (which must exist).
    pub fn from_instance(inst: &ProblemInstance<T>) -> Result<Self> {
        let oracle = inst.oracle.clone().ok_or_else(|| invalid("instance has no closed-form oracle"))?;
        Ok(Self { observed: inst.objective(), expected: inst.expected_objective(), oracle })
    }
}

/// Source of independent replicates; `seed` is derived per replicate.
pub trait ReplicateGenerator<T: Scalar>: Sync {
    fn replicate(&self, seed: u64) -> Result<Replicate<T>>;
}

impl<T: Scalar, F> ReplicateGenerator<T> for F
where
    F: Fn(u64) -> Result<Replicate<T>> + Sync,
{
    fn replicate(&self, seed: u64) -> Result<Replicate<T>> {
        self(seed)
    }
}

/// How the neighbourhood of `Z*` is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Localization {
    /// `⟨E A, Z* − Z⟩ ≤ r`.
    ExcessRisk,
    /// `‖Z* − Z‖₁ ≤ r`.
    L1,
    /// `‖Z* − Z‖₂² ≤ r`.
    L2,
}

impl std::str::FromStr for Localization {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "excess_risk" => Ok(Self::ExcessRisk),
            "l1" => Ok(Self::L1),
            "l2" => Ok(Self::L2),
            other => Err(invalid(format!("unknown localization {other:?}"))),
        }
    }
}

fn localization_atom<T: Scalar>(loc: Localization, rep: &Replicate<T>, r: f64) -> ConstraintAtom<T> {
    match loc {
        Localization::ExcessRisk => {
            // ⟨E A, Z* − Z⟩ ≤ r  ⇔  ⟨−E A, Z⟩ ≤ r − ⟨E A, Z*⟩.
            let rhs = r - inner_unchecked(&rep.expected, &rep.oracle);
            ConstraintAtom::halfspace(rep.expected.scale(-1.0), rhs)
        }
        Localization::L1 => ConstraintAtom::l1_ball(rep.oracle.clone(), r),
        Localization::L2 => ConstraintAtom::l2_ball(rep.oracle.clone(), r.sqrt()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointConfig {
    pub delta_prob: f64,
    pub n_mc: usize,
    /// Strictly positive, ascending radii.
    pub r_grid: Vec<f64>,
    pub localization: Localization,
    pub seed: u64,
    pub solver: PierraConfig,
}

impl FixedPointConfig {
    /// Inner suprema are solved to `feas_tol = 1e-6`, looser than estimation
    /// solves; the reported suprema are then lower bounds up to tolerance.
    pub fn default_solver() -> PierraConfig {
        PierraConfig { feas_tol: 1e-6, obj_tol: 1e-7, max_iters: 20_000, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta_prob > 0.0 && self.delta_prob < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta_prob)));
        }
        if self.n_mc == 0 {
            return Err(invalid("at least one replicate is required"));
        }
        if self.r_grid.is_empty() || self.r_grid.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(invalid("radius grid must be non-empty with positive finite entries"));
        }
        if self.r_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("radius grid must be strictly ascending"));
        }
        self.solver.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantilePoint {
    pub r: f64,
    pub quantile: f64,
    pub n_effective: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointEstimate {
    pub r_hat: f64,
    pub delta: f64,
    pub n_mc: usize,
    pub quantile_curve: Vec<QuantilePoint>,
    /// Replicates excluded because an inner solve did not converge.
    pub flagged: usize,
    /// More than 10% of the replicates were flagged.
    pub unreliable: bool,
    /// No grid radius satisfied `quantile ≤ r/2`; `r_hat` is the largest radius.
    pub unresolved: bool,
}

/// Suprema of one replicate along the grid, or `None` if any solve failed to
/// converge. Values are made monotone in `r`: the maximizer found at a
/// smaller radius stays feasible for every larger one.
fn replicate_suprema<T: Scalar>(
    rep: &Replicate<T>,
    atoms: &[ConstraintAtom<T>],
    config: &FixedPointConfig,
) -> Result<Option<Vec<f64>>> {
    let w = &rep.observed - &rep.expected;
    let base = inner_unchecked(&w, &rep.oracle);
    let mut warm: Option<PierraState<T>> = None;
    let mut best = 0.0_f64;
    let mut out = Vec::with_capacity(config.r_grid.len());
    for &r in &config.r_grid {
        let mut local = atoms.to_vec();
        local.push(localization_atom(config.localization, rep, r));
        let (_, report, state) = pierra_solve_from(&w, &local, &config.solver, warm.as_ref())?;
        if !report.converged() {
            return Ok(None);
        }
        warm = Some(state);
        best = best.max(report.objective - base);
        out.push(best);
    }
    Ok(Some(out))
}

/// Order statistic at 1-based index `⌈(1 − Δ) m⌉`, clamped to `[1, m]`.
pub fn empirical_quantile(sorted: &[f64], delta: f64) -> f64 {
    let m = sorted.len();
    let idx = (((1.0 - delta) * m as f64).ceil() as usize).clamp(1, m);
    sorted[idx - 1]
}

/// Localized suprema of every replicate along the grid (`None` for a
/// replicate with a non-converged inner solve). Replicate `i` is drawn with
/// seed `derive_seed(config.seed, [i])`.
pub fn replicate_curves<T: Scalar, G: ReplicateGenerator<T>>(
    generator: &G,
    atoms: &[ConstraintAtom<T>],
    config: &FixedPointConfig,
) -> Result<Vec<Option<Vec<f64>>>> {
    config.validate()?;
    (0..config.n_mc)
        .into_par_iter()
        .map(|i| {
            let rep = generator.replicate(derive_seed(config.seed, &[i as u64]))?;
            replicate_suprema(&rep, atoms, config)
        })
        .collect()
}

/// Quantile curve and `r̂` from per-replicate suprema.
pub fn summarize_curves(curves: &[Option<Vec<f64>>], config: &FixedPointConfig) -> Result<FixedPointEstimate> {
    config.validate()?;
    let ok: Vec<&Vec<f64>> = curves.iter().flatten().collect();
    if ok.iter().any(|v| v.len() != config.r_grid.len()) {
        return Err(invalid("supremum curve length differs from the radius grid"));
    }
    let flagged = curves.len() - ok.len();
    if ok.is_empty() {
        return Err(crate::Error::NotConverged("every replicate had a non-converged inner solve".into()));
    }
    let mut curve = Vec::with_capacity(config.r_grid.len());
    for (k, &r) in config.r_grid.iter().enumerate() {
        let mut vals: Vec<f64> = ok.iter().map(|v| v[k]).collect();
        vals.sort_by(f64::total_cmp);
        curve.push(QuantilePoint { r, quantile: empirical_quantile(&vals, config.delta_prob), n_effective: ok.len() });
    }
    let hit = curve.iter().find(|p| p.quantile <= p.r / 2.0);
    let (r_hat, unresolved) = match hit {
        Some(p) => (p.r, false),
        None => (*config.r_grid.last().expect("non-empty grid"), true),
    };
    Ok(FixedPointEstimate {
        r_hat,
        delta: config.delta_prob,
        n_mc: curves.len(),
        quantile_curve: curve,
        flagged,
        unreliable: flagged * 10 > curves.len(),
        unresolved,
    })
}

/// Estimates `r̂` as the smallest grid radius whose `(1 − Δ)`-quantile of the
/// localized supremum is at most `r/2`.
pub fn estimate_fixed_point<T: Scalar, G: ReplicateGenerator<T>>(
    generator: &G,
    atoms: &[ConstraintAtom<T>],
    config: &FixedPointConfig,
) -> Result<FixedPointEstimate> {
    summarize_curves(&replicate_curves(generator, atoms, config)?, config)
}

/// Geometric grid of `k ≥ 2` radii from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k < 2 {
        return vec![lo];
    }
    let ratio = (hi / lo).powf(1.0 / (k - 1) as f64);
    (0..k).map(|i| if i == k - 1 { hi } else { lo * ratio.powi(i as i32) }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gen_ssbm, signed_atoms, SsbmParams};

    fn config(n_mc: usize, grid: Vec<f64>) -> FixedPointConfig {
        FixedPointConfig {
            delta_prob: 0.1,
            n_mc,
            r_grid: grid,
            localization: Localization::L1,
            seed: 5,
            solver: FixedPointConfig::default_solver(),
        }
    }

    #[test]
    fn quantile_index() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        assert_eq!(empirical_quantile(&v, 0.1), 9.0);
        assert_eq!(empirical_quantile(&v, 0.05), 10.0);
        assert_eq!(empirical_quantile(&v, 0.99), 1.0);
    }

    #[test]
    fn zero_noise_gives_first_radius() {
        let params = SsbmParams { n: 6, k: 2, p: 0.9, q: 0.1, delta: 0.5, sizes: None };
        let gen = |seed: u64| {
            let inst = gen_ssbm(&params, seed)?;
            let mut rep = Replicate::from_instance(&inst)?;
            rep.observed = rep.expected.clone();
            Ok(rep)
        };
        let est = estimate_fixed_point(&gen, &signed_atoms(), &config(4, vec![0.5, 1.0, 2.0])).unwrap();
        assert_eq!(est.r_hat, 0.5);
        assert!(!est.unresolved);
        assert!(est.quantile_curve.iter().all(|p| p.quantile.abs() < 1e-9));
    }

    #[test]
    fn rejects_bad_grids() {
        let gen = |_: u64| -> Result<Replicate<f64>> { Err(invalid("unused")) };
        assert!(estimate_fixed_point(&gen, &signed_atoms(), &config(2, vec![])).is_err());
        assert!(estimate_fixed_point(&gen, &signed_atoms(), &config(2, vec![2.0, 1.0])).is_err());
        assert!(estimate_fixed_point(&gen, &signed_atoms(), &config(2, vec![0.0, 1.0])).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = geometric_grid(1.0, 256.0, 9);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[8], 256.0);
        assert!((g[1] - 2.0).abs() < 1e-12);
    }
}
