//! Quality metrics, curvature checks, closed-form bounds and exact oracles.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::linalg::{frobenius_inner, svd, HermitianMatrix, Scalar, SelfAdjoint, SymmetricMatrix};
use crate::models::{CommunityAssignment, CutVector};

/// Upper bound on the real Grothendieck constant used by the bound evaluator.
pub const GROTHENDIECK_KG: f64 = 1.7822;

/// Largest graph accepted by [`brute_force_maxcut`].
pub const BRUTE_FORCE_MAX_N: usize = 20;

fn choose2(x: u64) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// Adjusted Rand index (permutation model) from the contingency table.
/// Degenerate cases where the index is undefined (e.g. both partitions
/// trivial) return 1.
pub fn ari(a: &CommunityAssignment, b: &CommunityAssignment) -> Result<f64> {
    check_dim(a.n(), b.n())?;
    let mut table = vec![vec![0u64; b.k()]; a.k()];
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        table[x][y] += 1;
    }
    let index: f64 = table.iter().flatten().map(|&c| choose2(c)).sum();
    let rows: f64 = table.iter().map(|r| choose2(r.iter().sum())).sum();
    let cols: f64 = (0..b.k()).map(|c| choose2(table.iter().map(|r| r[c]).sum())).sum();
    let total = choose2(a.n() as u64);
    let expected = rows * cols / total;
    let max = 0.5 * (rows + cols);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// The complete ground-truth signed network: `+1` inside communities
/// (diagonal included), `−1` across.
pub fn complete_signed_matrix(truth: &CommunityAssignment) -> SymmetricMatrix {
    SymmetricMatrix::from_upper(truth.n(), |i, j| if truth.same(i, j) { 1.0 } else { -1.0 })
}

/// Violation rate `γ = Σ_c (x_cᵀ A⁻ x_c + x_cᵀ L⁺ x_c) / n²` against the
/// complete signed matrix `A_com = A⁺ − A⁻`, where `L⁺` is the combinatorial
/// Laplacian of `A⁺`: negative pairs inside a cluster and positive pairs cut
/// by the clustering each count once per ordered pair.
pub fn signed_error_rate(assignment: &CommunityAssignment, a_com: &SymmetricMatrix) -> Result<f64> {
    let n = a_com.dim();
    check_dim(n, assignment.n())?;
    let labels = assignment.labels();
    let mut violations = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let a = a_com.get(i, j);
            if a != 1.0 && a != -1.0 {
                return Err(invalid(format!("A_com[{i}][{j}] = {a} is not ±1")));
            }
            let same = labels[i] == labels[j];
            if (same && a < 0.0) || (!same && a > 0.0) {
                violations += 1.0;
            }
        }
    }
    Ok(violations / (n * n) as f64)
}

fn rotation(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, -s], [s, c]]
}

/// `4 − 2(σ₁ + σ₂)` of `Q = (1/n) Σ R(θ̂_i) R(θ_i)ᵀ` over SO(2) rotations.
pub fn sync_mse(est: &[f64], truth: &[f64]) -> Result<f64> {
    check_dim(truth.len(), est.len())?;
    if est.is_empty() {
        return Err(invalid("at least one angle is required"));
    }
    let mut q = DMatrix::<f64>::zeros(2, 2);
    for (&a, &b) in est.iter().zip(truth) {
        let (h, t) = (rotation(a), rotation(b));
        for r in 0..2 {
            for c in 0..2 {
                q[(r, c)] += h[r][0] * t[c][0] + h[r][1] * t[c][1];
            }
        }
    }
    q /= est.len() as f64;
    let s = svd(&q)?.singular_values;
    Ok((4.0 - 2.0 * (s[0] + s[1])).max(0.0))
}

/// `min_{|z|=1} ‖x̂ − z x*‖₂` with the optimal `z = ⟨x̂, x*⟩/|⟨x̂, x*⟩|`
/// (`z = 1` when the inner product vanishes).
pub fn phase_aligned_l2(x_hat: &DVector<Complex64>, x_star: &DVector<Complex64>) -> Result<f64> {
    check_dim(x_star.len(), x_hat.len())?;
    let ip: Complex64 = x_hat.iter().zip(x_star.iter()).map(|(a, b)| a * b.conj()).sum();
    let z = if ip.norm() > 0.0 { ip / ip.norm() } else { Complex64::new(1.0, 0.0) };
    Ok(x_hat.iter().zip(x_star.iter()).map(|(a, b)| (a - z * b).norm_sqr()).sum::<f64>().sqrt())
}

/// `cut(G, x) = ¼ Σ_ij A⁰_ij (1 − x_i x_j)`.
pub fn cut_value(a0: &SymmetricMatrix, x: &CutVector) -> Result<f64> {
    check_dim(a0.dim(), x.len())?;
    let s = x.signs();
    let m = a0.as_matrix();
    let mut total = 0.0;
    for j in 0..s.len() {
        for i in 0..s.len() {
            if s[i] != s[j] {
                total += 2.0 * m[(i, j)];
            }
        }
    }
    Ok(total / 4.0)
}

/// Exhaustive MAX-CUT over the `2^{n−1}` sign patterns with `x₁ = +1`.
/// Among equal values the lexicographically smallest pattern (with `+1 < −1`)
/// wins.
pub fn brute_force_maxcut(a0: &SymmetricMatrix) -> Result<(f64, CutVector)> {
    let n = a0.dim();
    if n > BRUTE_FORCE_MAX_N {
        return Err(invalid(format!("brute force refused for n = {n} > {BRUTE_FORCE_MAX_N}")));
    }
    let m = a0.as_matrix();
    let mut best = (f64::NEG_INFINITY, 0u32);
    // Bit k of `mask` (k = 0 is node n−1) marks node n−1−k as −1, so
    // increasing masks enumerate patterns in lexicographic order.
    for mask in 0..(1u32 << (n - 1)) {
        let neg = |i: usize| i > 0 && (mask >> (n - 1 - i)) & 1 == 1;
        let mut v = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                if neg(i) != neg(j) {
                    v += m[(i, j)];
                }
            }
        }
        if v > best.0 {
            best = (v, mask);
        }
    }
    let mask = best.1;
    let x = (0..n).map(|i| if i > 0 && (mask >> (n - 1 - i)) & 1 == 1 { -1 } else { 1 }).collect();
    Ok((best.0, CutVector::new(x)?))
}

/// `⟨E_obj, Z* − Z⟩`; pass `E[A]`, `E[A] − αJ` or `E[B]` as the problem dictates.
pub fn excess_risk<T: Scalar>(expected_obj: &SelfAdjoint<T>, z_star: &SelfAdjoint<T>, z: &SelfAdjoint<T>) -> Result<f64> {
    check_dim(z_star.dim(), z.dim())?;
    frobenius_inner(expected_obj, &(z_star - z))
}

/// Both sides of the synchronization curvature identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncCurvature {
    pub theta: f64,
    /// `⟨E A, Z* − Z⟩`.
    pub lhs: f64,
    /// `θ ‖Z* − Z‖₂²`.
    pub rhs_l2: f64,
    /// `θ ‖|Z*|² − |Z|²‖₁`.
    pub extra_l1: f64,
}

/// Evaluates `⟨E A, Z* − Z⟩`, `θ‖Z* − Z‖₂²` and `θ‖|Z*|² − |Z|²‖₁` with `θ`
/// half the common modulus of the off-diagonal entries of `E A`
/// (`e^{−σ²/2}/2` for full Gaussian observations).
pub fn curvature_check_sync(ea: &HermitianMatrix, z_star: &HermitianMatrix, z: &HermitianMatrix) -> Result<SyncCurvature> {
    let n = ea.dim();
    check_dim(n, z_star.dim())?;
    check_dim(n, z.dim())?;
    for d in z.diagonal() {
        if (d - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("Z must have a unit diagonal, found {d}")));
        }
    }
    let theta = if n > 1 {
        let s: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| ea.get(i, j).norm()).sum();
        s / (n * (n - 1)) as f64 / 2.0
    } else {
        0.0
    };
    let lhs = excess_risk(ea, z_star, z)?;
    let d = z_star - z;
    let rhs_l2 = theta * d.frobenius_norm().powi(2);
    let extra: f64 = z_star
        .as_matrix()
        .iter()
        .zip(z.as_matrix().iter())
        .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
        .sum();
    Ok(SyncCurvature { theta, lhs, rhs_l2, extra_l1: theta * extra })
}

/// A closed-form bound with its inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub formula: String,
    pub value: f64,
    pub inputs: BTreeMap<String, f64>,
    /// `false` when the inputs fall outside the regime the bound is proved in.
    pub valid: bool,
}

impl BoundReport {
    fn new(formula: &str, value: f64, inputs: &[(&str, f64)], valid: bool) -> Self {
        Self {
            formula: formula.into(),
            value,
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            valid,
        }
    }
}

/// Masked MAX-CUT fixed point: `2n√(2 log 4 · (1−p)(n−1)/p) + 8n log 4 / 3`.
pub fn maxcut_rstar_bound(n: usize, p: f64) -> Result<BoundReport> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("mask probability must lie in (0, 1], got {p}")));
    }
    let nf = n as f64;
    let log4 = 4f64.ln();
    let value = 2.0 * nf * (2.0 * log4 * (1.0 - p) * (nf - 1.0) / p).sqrt() + 8.0 * nf * log4 / 3.0;
    Ok(BoundReport::new("maxcut_rstar", value, &[("n", nf), ("p", p)], true))
}

/// Community detection global bound `(8/3) K_G (2n log 2 + log(1/Δ))`.
pub fn gv_rstar_bound(n: usize, delta_prob: f64) -> Result<BoundReport> {
    if !(delta_prob > 0.0 && delta_prob < 1.0) {
        return Err(invalid(format!("deviation level must lie in (0, 1), got {delta_prob}")));
    }
    let nf = n as f64;
    let value = 8.0 / 3.0 * GROTHENDIECK_KG * (2.0 * nf * LN_2 + (1.0 / delta_prob).ln());
    Ok(BoundReport::new("guedon_vershynin", value, &[("n", nf), ("delta", delta_prob), ("k_g", GROTHENDIECK_KG)], true))
}

/// Synchronization excess-risk bound `(128/3) √ε σ⁴ N`, `N = n(n−1)/2`;
/// `valid` records the hypothesis `σ ≤ √(log(ε n⁴))`.
pub fn sync_excess_bound(n: usize, sigma: f64, eps: f64) -> Result<BoundReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(sigma >= 0.0) {
        return Err(invalid(format!("sigma must be non-negative, got {sigma}")));
    }
    let nf = n as f64;
    let big_n = nf * (nf - 1.0) / 2.0;
    let value = 128.0 / 3.0 * eps.sqrt() * sigma.powi(4) * big_n;
    let valid = sigma * sigma <= (eps * nf.powi(4)).ln();
    Ok(BoundReport::new("sync_excess", value, &[("n", nf), ("sigma", sigma), ("eps", eps)], valid))
}

/// Aligned phase error divided by `8√(2/3) ε^{1/4} e^{σ²/4} σ² √n`, the
/// eigenvector error bound without its unspecified absolute constant.
pub fn sync_error_ratio(aligned_error: f64, n: usize, sigma: f64, eps: f64) -> f64 {
    let scale = 8.0 * (2.0f64 / 3.0).sqrt() * eps.powf(0.25) * (sigma * sigma / 4.0).exp() * sigma * sigma * (n as f64).sqrt();
    aligned_error / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::unit_phasors;

    fn assign(v: &[usize]) -> CommunityAssignment {
        CommunityAssignment::from_raw(v).unwrap()
    }

    #[test]
    fn ari_examples() {
        let a = assign(&[0, 0, 1, 1, 2]);
        assert_eq!(ari(&a, &a).unwrap(), 1.0);
        assert_eq!(ari(&a, &assign(&[5, 5, 3, 3, 9])).unwrap(), 1.0);
        // Hand computation: every cell of the 2×2 table holds one item, so
        // index = 0, row/col sums = 2, expected = 2·2/6, max = 2.
        let v = ari(&assign(&[0, 0, 1, 1]), &assign(&[0, 1, 0, 1])).unwrap();
        assert!((v - (0.0 - 2.0 / 3.0) / (2.0 - 2.0 / 3.0)).abs() < 1e-15);
        assert!(ari(&a, &assign(&[0, 1])).is_err());
    }

    #[test]
    fn error_rate_examples() {
        let truth = assign(&[0, 0, 1, 1]);
        let a_com = complete_signed_matrix(&truth);
        assert_eq!(signed_error_rate(&truth, &a_com).unwrap(), 0.0);
        assert_eq!(signed_error_rate(&assign(&[0, 0, 0, 0]), &a_com).unwrap(), 0.5);
        assert_eq!(signed_error_rate(&assign(&[1, 1, 0, 0]), &a_com).unwrap(), 0.0);
        assert!(signed_error_rate(&truth, &SymmetricMatrix::zeros(4)).is_err());
    }

    #[test]
    fn mse_examples() {
        let t = [0.3, 1.2, -2.0, 2.9];
        assert!(sync_mse(&t, &t).unwrap() < 1e-12);
        let shifted: Vec<f64> = t.iter().map(|x| x + 0.77).collect();
        assert!(sync_mse(&shifted, &t).unwrap() < 1e-12);
        assert!(sync_mse(&t, &t[..2]).is_err());
    }

    #[test]
    fn aligned_l2_examples() {
        let x = unit_phasors(&[0.1, 0.5, 2.0]);
        assert!(phase_aligned_l2(&x, &x).unwrap() < 1e-15);
        let rot = x.map(|v| v * Complex64::from_polar(1.0, 1.1));
        assert!(phase_aligned_l2(&rot, &x).unwrap() < 1e-14);
    }

    #[test]
    fn cut_examples() {
        let k3 = SymmetricMatrix::from_upper(3, |i, j| if i == j { 0.0 } else { 1.0 });
        assert_eq!(cut_value(&k3, &CutVector::new(vec![1, 1, -1]).unwrap()).unwrap(), 2.0);
        assert_eq!(brute_force_maxcut(&k3).unwrap().0, 2.0);
        let k4 = SymmetricMatrix::from_upper(4, |i, j| if i == j { 0.0 } else { 1.0 });
        assert_eq!(brute_force_maxcut(&k4).unwrap().0, 4.0);
        let c5 = SymmetricMatrix::from_upper(5, |i, j| if (j - i) == 1 || (j - i) == 4 { 1.0 } else { 0.0 });
        let (v, x) = brute_force_maxcut(&c5).unwrap();
        assert_eq!(v, 4.0);
        assert_eq!(x.signs()[0], 1);
        assert_eq!(cut_value(&c5, &x).unwrap(), 4.0);
        assert!(brute_force_maxcut(&SymmetricMatrix::zeros(21)).is_err());
    }

    #[test]
    fn bound_examples() {
        let b = maxcut_rstar_bound(500, 0.5).unwrap();
        assert!((b.value - 3.90e4).abs() / 3.90e4 < 5e-3);
        let p1 = maxcut_rstar_bound(10, 1.0).unwrap().value;
        assert!((p1 - 80.0 * 4f64.ln() / 3.0).abs() < 1e-12);
        assert!(maxcut_rstar_bound(10, 0.0).is_err());
        let g = gv_rstar_bound(1000, 0.5).unwrap();
        assert!((g.value - 6.59e3).abs() / 6.59e3 < 5e-3);
        assert!(gv_rstar_bound(10, 1.0).is_err());
        let s = sync_excess_bound(200, 0.5, 0.01).unwrap();
        assert!((s.value - 5.31e3).abs() / 5.31e3 < 5e-3);
        assert!(s.valid);
        assert_eq!(sync_excess_bound(200, 0.0, 0.01).unwrap().value, 0.0);
        assert!(!sync_excess_bound(3, 3.0, 0.01).unwrap().valid);
    }
}
