//! Burer–Monteiro solver for `⟨M, Z⟩` over `{Z ⪰ 0, diag(Z) = 1}`.
//!
//! `Z = Y Y*` with `Y ∈ 𝔽^{n×p}` whose rows have unit norm, so the feasible
//! set becomes a product of `n` spheres (real) or complex spheres (Hermitian
//! case). The solver runs Riemannian gradient descent with Armijo
//! backtracking and a small random kick after each convergence to step off
//! saddle points.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AtomResidual, SolveReport, Termination};
use crate::error::{invalid, Result};
use crate::linalg::{Scalar, SelfAdjoint};
use crate::models::elliptope_atoms;
use crate::rng::{derive_seed, stream_rng, StreamRng};

const ARMIJO_C1: f64 = 1e-4;
const KICK_SIZE: f64 = 1e-3;
const KICK_GAIN: f64 = 1e-8;
const MAX_KICKS: usize = 20;
const MIN_STEP: f64 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BmConfig {
    /// Factor width `p`; `None` means [`bm_rank`]`(n)`.
    pub rank: Option<usize>,
    pub max_iters: usize,
    /// Stop when `‖grad‖_F ≤ grad_tol · ‖M‖_F`.
    pub grad_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for BmConfig {
    fn default() -> Self {
        Self { rank: None, max_iters: 20_000, grad_tol: 1e-6, restarts: 3, seed: 0 }
    }
}

/// `⌈√(2n)⌉`, the width above which every second-order critical point is
/// generically optimal.
pub fn bm_rank(n: usize) -> usize {
    let mut p = (2.0 * n as f64).sqrt().ceil() as usize;
    // Guard against floating-point error around perfect squares.
    while p > 0 && (p - 1) * (p - 1) >= 2 * n {
        p -= 1;
    }
    while p * p < 2 * n {
        p += 1;
    }
    p
}

#[derive(Clone, Debug)]
pub struct BmSolution<T: Scalar> {
    pub y: DMatrix<T>,
    pub z: SelfAdjoint<T>,
    pub report: SolveReport,
}

struct Run<T: Scalar> {
    y: DMatrix<T>,
    /// Minimized value `⟨C, YY*⟩`.
    value: f64,
    iterations: usize,
    gradient_norm: f64,
    trace: Vec<f64>,
}

/// `Re Σ a_ij conj(b_ij)`.
fn re_inner<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let (xr, xi) = x.parts();
            let (yr, yi) = y.parts();
            xr * yr + xi * yi
        })
        .sum()
}

fn normalize_rows<T: Scalar>(y: &mut DMatrix<T>) {
    for mut row in y.row_iter_mut() {
        let norm = row.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt();
        if norm > 0.0 {
            let s = T::from_real(1.0 / norm);
            row.iter_mut().for_each(|x| *x *= s);
        } else {
            row.iter_mut().for_each(|x| *x = T::from_real(0.0));
            row[0] = T::from_real(1.0);
        }
    }
}

/// Projects each row of `g` onto the tangent space of its sphere at `y`.
fn tangent<T: Scalar>(y: &DMatrix<T>, mut g: DMatrix<T>) -> DMatrix<T> {
    for i in 0..y.nrows() {
        let dot: f64 = (0..y.ncols())
            .map(|k| {
                let (gr, gi) = g[(i, k)].parts();
                let (yr, yi) = y[(i, k)].parts();
                gr * yr + gi * yi
            })
            .sum();
        let d = T::from_real(dot);
        for k in 0..y.ncols() {
            let v = y[(i, k)];
            g[(i, k)] -= v * d;
        }
    }
    g
}

fn random_factor<T: Scalar>(n: usize, p: usize, rng: &mut StreamRng) -> DMatrix<T> {
    let mut y = DMatrix::from_fn(n, p, |_, _| T::gaussian(rng));
    normalize_rows(&mut y);
    y
}

/// Riemannian gradient descent from `y`; spends at most `budget` iterations.
fn descend<T: Scalar>(
    c: &DMatrix<T>,
    y: DMatrix<T>,
    tol: f64,
    step0: f64,
    budget: usize,
    trace: &mut Vec<f64>,
) -> (DMatrix<T>, f64, usize, f64) {
    let mut y = y;
    let mut cy = c * &y;
    let mut f = re_inner(&y, &cy);
    let mut step = step0;
    let mut used = 0;
    loop {
        let g = tangent(&y, cy.scale(2.0));
        let gn2 = re_inner(&g, &g);
        if gn2.sqrt() <= tol || used >= budget {
            return (y, f, used, gn2.sqrt());
        }
        used += 1;
        // Try twice the last accepted step, then halve until Armijo holds.
        step *= 2.0;
        loop {
            let mut cand = &y - g.scale(step);
            normalize_rows(&mut cand);
            let c_cand = c * &cand;
            let f_cand = re_inner(&cand, &c_cand);
            if f_cand <= f - ARMIJO_C1 * step * gn2 {
                y = cand;
                cy = c_cand;
                f = f_cand;
                break;
            }
            step *= 0.5;
            if step < MIN_STEP {
                // No descent possible at machine precision: stationary.
                return (y, f, used, gn2.sqrt());
            }
        }
        trace.push(f);
    }
}

fn run_restart<T: Scalar>(c: &DMatrix<T>, n: usize, p: usize, config: &BmConfig, restart: usize, scale: f64) -> Run<T> {
    let mut rng = stream_rng(derive_seed(config.seed, &[restart as u64]), 0);
    let y0 = random_factor::<T>(n, p, &mut rng);
    let tol = config.grad_tol * scale;
    let step0 = 1.0 / (2.0 * scale);
    let mut trace = Vec::new();
    let (mut y, mut f, mut used, mut gn) = descend(c, y0, tol, step0 / 2.0, config.max_iters, &mut trace);
    let mut kicks = 0;
    while gn <= tol && used < config.max_iters && kicks < MAX_KICKS {
        kicks += 1;
        let dir = tangent(&y, DMatrix::from_fn(n, p, |_, _| T::gaussian(&mut rng)));
        let norm = re_inner(&dir, &dir).sqrt();
        if norm == 0.0 {
            break;
        }
        let mut kicked = &y + dir.scale(KICK_SIZE / norm);
        normalize_rows(&mut kicked);
        let mut side = Vec::new();
        let (y2, f2, used2, gn2) = descend(c, kicked, tol, step0 / 2.0, config.max_iters - used, &mut side);
        used += used2;
        if f2 < f - KICK_GAIN * (f.abs() + scale) {
            trace.extend(side);
            y = y2;
            f = f2;
            gn = gn2;
        } else {
            break;
        }
    }
    Run { y, value: f, iterations: used, gradient_norm: gn, trace }
}

/// Optimizes `⟨M, YY*⟩` (maximized or minimized per `sense`) over unit-norm
/// rows; returns the best of `config.restarts` random starts, ties going to
/// the lowest restart index.
pub fn bm_solve<T: Scalar>(objective: &SelfAdjoint<T>, sense: Sense, config: &BmConfig) -> Result<BmSolution<T>> {
    let n = objective.dim();
    let p = config.rank.unwrap_or_else(|| bm_rank(n));
    if p < 1 {
        return Err(invalid("rank must be at least 1"));
    }
    if config.restarts < 1 {
        return Err(invalid("at least one restart is required"));
    }
    if !(config.grad_tol > 0.0) {
        return Err(invalid("grad_tol must be positive"));
    }
    if objective.as_matrix().iter().any(|x| !x.is_finite()) {
        return Err(invalid("objective has non-finite entries"));
    }
    let sign = match sense {
        Sense::Max => -1.0,
        Sense::Min => 1.0,
    };
    let c = objective.as_matrix().map(|x| x * T::from_real(sign));
    let scale = objective.frobenius_norm().max(f64::MIN_POSITIVE);
    let tol = config.grad_tol * scale;

    let runs: Vec<Run<T>> =
        (0..config.restarts).into_par_iter().map(|r| run_restart(&c, n, p, config, r, scale)).collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.value.total_cmp(&b.value).then(ia.cmp(ib)))
        .map(|(_, r)| r)
        .expect("restarts >= 1");

    let z = SelfAdjoint::gram(&best.y);
    let residuals = elliptope_atoms::<T>()
        .iter()
        .map(|a| Ok(AtomResidual { atom: a.name().to_string(), residual: a.residual(&z)? }))
        .collect::<Result<_>>()?;
    let report = SolveReport {
        solver: "burer_monteiro".into(),
        iterations: best.iterations,
        objective: sign * best.value,
        objective_trace: best.trace.iter().map(|v| sign * v).collect(),
        residuals,
        termination: if best.gradient_norm <= tol { Termination::Converged } else { Termination::MaxIters },
        epsilon: None,
        rank: Some(p),
        gradient_norm: Some(best.gradient_norm),
    };
    Ok(BmSolution { y: best.y, z, report })
}
