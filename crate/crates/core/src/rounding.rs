//! From SDP solutions back to cuts, communities and phases.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::linalg::{HermitianMatrix, SymmetricMatrix};
use crate::metrics::cut_value;
use crate::models::{CommunityAssignment, CutVector};
use crate::rng::{derive_seed, stream_rng};
use crate::signed::{kmeans, DEFAULT_RESTARTS};

/// Rows `X_i` of a factorization `Ẑ ≈ X Xᵀ`, each of unit length.
#[derive(Clone, Debug)]
pub struct GramFactor {
    pub rows: DMatrix<f64>,
}

impl GramFactor {
    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn width(&self) -> usize {
        self.rows.ncols()
    }
}

/// Eigendecomposition-based factor `X = V Λ₊^{1/2}` with rows renormalized.
///
/// Rejects matrices whose smallest eigenvalue is below `−1e-6·‖Ẑ‖_F`; such
/// inputs should be projected onto the PSD cone first.
pub fn factorize_gram(z: &SymmetricMatrix) -> Result<GramFactor> {
    let eig = z.eigen()?;
    let n = z.dim();
    let min = *eig.values.last().expect("n >= 1");
    if min < -1e-6 * z.frobenius_norm() {
        return Err(invalid(format!("matrix is not positive semidefinite (min eigenvalue {min:e})")));
    }
    let keep: Vec<usize> = (0..n).filter(|&k| eig.values[k] > 0.0).collect();
    let mut rows = if keep.is_empty() {
        DMatrix::zeros(n, 1)
    } else {
        DMatrix::from_fn(n, keep.len(), |i, c| eig.vectors[(i, keep[c])] * eig.values[keep[c]].sqrt())
    };
    for mut row in rows.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    Ok(GramFactor { rows })
}

/// Outcome of hyperplane rounding.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GwResult {
    pub best: CutVector,
    pub best_value: f64,
    pub mean: f64,
    pub std: f64,
    pub n_samples: usize,
}

fn hyperplane_cut(factor: &GramFactor, seed: u64, sample: usize) -> CutVector {
    let mut rng = stream_rng(derive_seed(seed, &[sample as u64]), 0);
    let g = DVector::from_fn(factor.width(), |_, _| StandardNormal.sample(&mut rng));
    let proj = &factor.rows * g;
    CutVector::new(proj.iter().map(|&v: &f64| if v >= 0.0 { 1 } else { -1 }).collect()).expect("signs are ±1")
}

/// Goemans–Williamson rounding of `ẑ`: `x_i = sign(⟨X_i, g⟩)` for Gaussian
/// `g`, with `sign(0) = +1`. Cuts are evaluated on `graph` (pass the full
/// graph `A⁰` when it is known). Sample `s` uses its own derived stream, and
/// the best cut is the first sample reaching the maximum.
pub fn gw_round(z: &SymmetricMatrix, graph: &SymmetricMatrix, n_samples: usize, seed: u64) -> Result<GwResult> {
    check_dim(z.dim(), graph.dim())?;
    if n_samples == 0 {
        return Err(invalid("at least one rounding sample is required"));
    }
    let factor = factorize_gram(z)?;
    let cuts: Vec<(CutVector, f64)> = (0..n_samples)
        .into_par_iter()
        .map(|s| {
            let x = hyperplane_cut(&factor, seed, s);
            let v = cut_value(graph, &x).expect("dimensions checked");
            (x, v)
        })
        .collect();
    let mean = cuts.iter().map(|c| c.1).sum::<f64>() / n_samples as f64;
    let var = if n_samples > 1 {
        cuts.iter().map(|c| (c.1 - mean).powi(2)).sum::<f64>() / (n_samples - 1) as f64
    } else {
        0.0
    };
    let (best, best_value) =
        cuts.into_iter().fold(None::<(CutVector, f64)>, |acc, c| match acc {
            Some(b) if b.1 >= c.1 => Some(b),
            _ => Some(c),
        })
        .expect("n_samples >= 1");
    Ok(GwResult { best, best_value, mean, std: var.sqrt(), n_samples })
}

/// `E[cut(G, x̂) | Ẑ] = (1/2π) Σ_ij A⁰_ij arccos(Ẑ_ij)`, entries clamped to
/// `[−1, 1]`.
pub fn expected_cut_closed_form(a0: &SymmetricMatrix, z: &SymmetricMatrix) -> Result<f64> {
    check_dim(a0.dim(), z.dim())?;
    let s: f64 = a0
        .as_matrix()
        .iter()
        .zip(z.as_matrix().iter())
        .filter(|(w, _)| **w != 0.0)
        .map(|(w, x)| w * x.clamp(-1.0, 1.0).acos())
        .sum();
    Ok(s / (2.0 * PI))
}

/// Top eigenvector of `Ẑ` scaled to `‖x̂‖₂ = √n`, without entrywise
/// normalization. A degenerate top eigenspace yields an arbitrary maximizer.
pub fn extract_phases(z: &HermitianMatrix) -> Result<DVector<Complex64>> {
    let n = z.dim() as f64;
    Ok(z.top_eigenvector(n.sqrt())?.1)
}

/// Spectral synchronization: top eigenvector of `A` scaled to `√n`, then
/// each entry projected to the unit circle (zeros map to 1).
pub fn spectral_sync(a: &HermitianMatrix) -> Result<DVector<Complex64>> {
    let v = extract_phases(a)?;
    Ok(v.map(|x| if x.norm() > 0.0 { x / x.norm() } else { Complex64::new(1.0, 0.0) }))
}

/// Angles `arg(x_i)` in `(−π, π]`.
pub fn angles(x: &DVector<Complex64>) -> Vec<f64> {
    x.iter().map(|v| v.arg()).collect()
}

/// Spectral embedding of `Ẑ` by its top `K` eigenvectors, each scaled by the
/// square root of its (clamped) eigenvalue, clustered by k-means.
pub fn extract_communities(z: &SymmetricMatrix, k: usize, seed: u64) -> Result<CommunityAssignment> {
    let n = z.dim();
    if k == 0 || k > n {
        return Err(invalid(format!("cannot extract {k} communities from {n} nodes")));
    }
    let eig = z.eigen()?;
    let emb = DMatrix::from_fn(n, k, |i, c| eig.vectors[(i, c)] * eig.values[c].max(0.0).sqrt());
    Ok(kmeans(&emb, k, DEFAULT_RESTARTS, seed)?.assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::phase_aligned_l2;
    use crate::models::{oracle_membership, oracle_sync, unit_phasors};

    fn edge() -> SymmetricMatrix {
        SymmetricMatrix::from_upper(2, |i, j| if i == j { 0.0 } else { 1.0 })
    }

    fn two(z12: f64) -> SymmetricMatrix {
        SymmetricMatrix::from_upper(2, |i, j| if i == j { 1.0 } else { z12 })
    }

    #[test]
    fn factor_examples() {
        let f = factorize_gram(&SymmetricMatrix::identity(3)).unwrap();
        let g = &f.rows * f.rows.transpose();
        assert!((g - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-12);
        let f = factorize_gram(&SymmetricMatrix::ones(4)).unwrap();
        assert_eq!(f.width(), 1);
        for i in 1..4 {
            assert!((f.rows.row(i) - f.rows.row(0)).norm() < 1e-12);
        }
        assert!(factorize_gram(&SymmetricMatrix::from_diagonal(&[1.0, -1.0])).is_err());
    }

    #[test]
    fn antipodal_rows_always_cut() {
        let r = gw_round(&two(-1.0), &edge(), 50, 1).unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.best_value, 1.0);
    }

    #[test]
    fn closed_form_examples() {
        assert!((expected_cut_closed_form(&edge(), &two(-1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((expected_cut_closed_form(&edge(), &two(0.0)).unwrap() - 0.5).abs() < 1e-15);
        // Slightly infeasible input is clamped rather than producing NaN.
        assert!((expected_cut_closed_form(&edge(), &two(-1.0 - 1e-12)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rounding_is_deterministic() {
        let z = SymmetricMatrix::from_upper(5, |i, j| if i == j { 1.0 } else { -0.2 });
        let a = SymmetricMatrix::from_upper(5, |i, j| if i == j { 0.0 } else { 1.0 });
        let r1 = gw_round(&z, &a, 64, 7).unwrap();
        let r2 = gw_round(&z, &a, 64, 7).unwrap();
        assert_eq!(r1.best, r2.best);
        assert_eq!(r1.mean, r2.mean);
    }

    #[test]
    fn rank_one_phases_are_exact() {
        let theta = [0.1, 2.0, -1.3, 0.7];
        let x = unit_phasors(&theta);
        let xh = extract_phases(&oracle_sync(&theta).unwrap()).unwrap();
        assert!(phase_aligned_l2(&xh, &x).unwrap() < 1e-8);
        let s = spectral_sync(&oracle_sync(&theta).unwrap()).unwrap();
        assert!(s.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn block_matrix_communities() {
        let truth = CommunityAssignment::new(vec![0, 0, 0, 1, 1, 1, 1]).unwrap();
        let got = extract_communities(&oracle_membership(&truth), 2, 3).unwrap();
        assert_eq!(got, truth);
        assert_eq!(extract_communities(&SymmetricMatrix::ones(5), 1, 0).unwrap().k(), 1);
        assert!(extract_communities(&SymmetricMatrix::ones(2), 3, 0).is_err());
    }
}
