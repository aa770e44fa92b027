//! Spectral baselines for signed graphs and the shared k-means engine.
//!
//! Self-loops are ignored by every degree computation here: an SSBM adjacency
//! carries `A_ii = 1` and an SDP output carries `Ẑ_ii = 1`, neither of which
//! is an edge.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::SymmetricMatrix;
use crate::models::CommunityAssignment;
use crate::rng::{derive_seed, stream_rng};

const LLOYD_MAX_ITERS: usize = 300;
pub const DEFAULT_RESTARTS: usize = 10;

/// Signed Laplacians of a symmetric weight matrix (diagonal ignored).
///
/// `D̄⁻¹` and `D̄^{-1/2}` use the pseudo-inverse convention: an isolated node
/// (`D̄_ii = 0`) gets a zero entry.
#[derive(Clone, Debug)]
pub struct SignedLaplacians {
    /// `D̄_ii = Σ_{j≠i} |A_ij|`.
    pub dbar: Vec<f64>,
    /// `L̄ = D̄ − A`.
    pub lbar: SymmetricMatrix,
    /// `L̄_rw = I − D̄⁻¹ A` (not symmetric).
    pub lbar_rw: DMatrix<f64>,
    /// `L̄_sym = I − D̄^{-1/2} A D̄^{-1/2}`.
    pub lbar_sym: SymmetricMatrix,
}

fn pinv(x: f64) -> f64 {
    if x > 0.0 {
        1.0 / x
    } else {
        0.0
    }
}

fn off_diagonal(a: &SymmetricMatrix) -> SymmetricMatrix {
    a.map_upper(|i, j, x| if i == j { 0.0 } else { x })
}

pub fn signed_laplacians(a: &SymmetricMatrix) -> SignedLaplacians {
    let a = off_diagonal(a);
    let n = a.dim();
    let dbar: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a.get(i, j).abs()).sum()).collect();
    let inv: Vec<f64> = dbar.iter().map(|&d| pinv(d)).collect();
    let inv_sqrt: Vec<f64> = dbar.iter().map(|&d| pinv(d.sqrt())).collect();
    let lbar = a.map_upper(|i, j, x| if i == j { dbar[i] } else { -x });
    let lbar_rw = DMatrix::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) - inv[i] * a.get(i, j));
    let lbar_sym = a.map_upper(|i, j, x| if i == j { 1.0 } else { -inv_sqrt[i] * x * inv_sqrt[j] });
    SignedLaplacians { dbar, lbar, lbar_rw, lbar_sym }
}

/// Result of [`kmeans`]: labels compacted to `0..k'` (`k' ≤ K` if duplicate
/// points leave a cluster empty), the inertia and the per-iteration inertia
/// of the winning restart.
#[derive(Clone, Debug)]
pub struct KmeansResult {
    pub assignment: CommunityAssignment,
    pub inertia: f64,
    pub inertia_trace: Vec<f64>,
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    (0..points.ncols()).map(|d| (points[(i, d)] - centers[(c, d)]).powi(2)).sum()
}

fn nearest(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.nrows() {
        let d = sq_dist(points, i, centers, c);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(points: &DMatrix<f64>, k: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let (n, dim) = points.shape();
    let mut centers = DMatrix::zeros(k, dim);
    let first = rng.random_range(0..n);
    centers.row_mut(0).copy_from(&points.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    idx = i;
                    break;
                }
                u -= w;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).copy_from(&points.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, &centers, c));
        }
    }
    centers
}

/// One k-means++ seeded Lloyd run.
fn lloyd(points: &DMatrix<f64>, k: usize, seed: u64) -> (Vec<usize>, f64, Vec<f64>) {
    let (n, dim) = points.shape();
    let mut rng = stream_rng(seed, 0);
    let mut centers = plus_plus_init(points, k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    for _ in 0..LLOYD_MAX_ITERS {
        let mut changed = false;
        let mut dists = vec![0.0; n];
        for i in 0..n {
            let (c, d) = nearest(points, i, &centers);
            dists[i] = d;
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        trace.push(dists.iter().sum());
        if !changed {
            break;
        }
        let mut sums = DMatrix::<f64>::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for d in 0..dim {
                sums[(labels[i], d)] += points[(i, d)];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for d in 0..dim {
                    centers[(c, d)] = sums[(c, d)] / counts[c] as f64;
                }
            } else {
                // Reseed an empty cluster with the point farthest from its center.
                let far = (0..n).fold(0, |b, i| if dists[i] > dists[b] { i } else { b });
                centers.row_mut(c).copy_from(&points.row(far));
                dists[far] = 0.0;
            }
        }
    }
    let inertia = (0..n).map(|i| sq_dist(points, i, &centers, labels[i])).sum();
    // Lloyd's assignment step is optimal for the current centers, so the
    // final inertia can only improve on the last recorded value.
    (labels, inertia, trace)
}

/// k-means with k-means++ initialization; best inertia over `restarts`
/// independent runs (ties to the lowest restart index).
pub fn kmeans(points: &DMatrix<f64>, k: usize, restarts: usize, seed: u64) -> Result<KmeansResult> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(invalid(format!("cannot form {k} clusters from {n} points")));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(invalid("k-means input has non-finite coordinates"));
    }
    let runs: Vec<_> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| lloyd(points, k, derive_seed(seed, &[r as u64])))
        .collect();
    let (labels, inertia, inertia_trace) = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.1.total_cmp(&b.1).then(ia.cmp(ib)))
        .map(|(_, r)| r)
        .expect("at least one restart");
    Ok(KmeansResult { assignment: CommunityAssignment::from_raw(&labels)?, inertia, inertia_trace })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralVariant {
    Adjacency,
    Lbar,
    LbarRw,
    LbarSym,
}

impl SpectralVariant {
    pub const ALL: [SpectralVariant; 4] = [Self::Adjacency, Self::Lbar, Self::LbarRw, Self::LbarSym];

    pub fn name(self) -> &'static str {
        match self {
            Self::Adjacency => "adjacency",
            Self::Lbar => "lbar",
            Self::LbarRw => "lbar_rw",
            Self::LbarSym => "lbar_sym",
        }
    }
}

impl std::str::FromStr for SpectralVariant {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| invalid(format!("unknown spectral variant {s:?}")))
    }
}

/// Columns `cols` of an eigenvector matrix.
fn columns(v: &DMatrix<f64>, cols: impl Iterator<Item = usize>) -> DMatrix<f64> {
    let cols: Vec<usize> = cols.collect();
    DMatrix::from_fn(v.nrows(), cols.len(), |i, c| v[(i, cols[c])])
}

/// Spectral embedding of `a` for the given variant, `K` columns wide.
pub fn spectral_embedding(a: &SymmetricMatrix, variant: SpectralVariant, k: usize) -> Result<DMatrix<f64>> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(invalid(format!("cannot embed {n} nodes in {k} dimensions")));
    }
    Ok(match variant {
        SpectralVariant::Adjacency => columns(&a.eigen()?.vectors, 0..k),
        SpectralVariant::Lbar => columns(&signed_laplacians(a).lbar.eigen()?.vectors, n - k..n),
        SpectralVariant::LbarSym => columns(&signed_laplacians(a).lbar_sym.eigen()?.vectors, n - k..n),
        SpectralVariant::LbarRw => {
            // L̄_rw = D̄^{-1/2} L̄_sym D̄^{1/2}: its eigenvectors are D̄^{-1/2} u
            // for eigenvectors u of L̄_sym, with the same eigenvalues.
            let lap = signed_laplacians(a);
            let u = columns(&lap.lbar_sym.eigen()?.vectors, n - k..n);
            let scale: Vec<f64> = lap.dbar.iter().map(|&d| pinv(d.sqrt())).collect();
            DMatrix::from_fn(n, k, |i, c| scale[i] * u[(i, c)])
        }
    })
}

pub fn spectral_cluster(
    a: &SymmetricMatrix,
    variant: SpectralVariant,
    k: usize,
    seed: u64,
) -> Result<CommunityAssignment> {
    let emb = spectral_embedding(a, variant, k)?;
    Ok(kmeans(&emb, k, DEFAULT_RESTARTS, seed)?.assignment)
}

fn positive_degrees(a: &SymmetricMatrix) -> Vec<f64> {
    let n = a.dim();
    (0..n).map(|i| (0..n).filter(|&j| j != i).map(|j| a.get(i, j).max(0.0)).sum()).collect()
}

/// Balanced normalized cut via its spectral relaxation: the `K` smallest
/// generalized eigenvectors of `(D⁺ − A, D̄)`, rows normalized, then k-means.
pub fn bnc_cluster(a: &SymmetricMatrix, k: usize, seed: u64) -> Result<CommunityAssignment> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(invalid(format!("cannot form {k} clusters from {n} nodes")));
    }
    let off = off_diagonal(a);
    let dplus = positive_degrees(&off);
    let dbar = signed_laplacians(&off).dbar;
    let s: Vec<f64> = dbar.iter().map(|&d| pinv(d.sqrt())).collect();
    // D̄^{-1/2} (D⁺ − A) D̄^{-1/2}; generalized eigenvectors are D̄^{-1/2} u.
    let m = off.map_upper(|i, j, x| s[i] * (if i == j { dplus[i] } else { -x }) * s[j]);
    let u = columns(&m.eigen()?.vectors, n - k..n);
    let mut x = DMatrix::from_fn(n, k, |i, c| s[i] * u[(i, c)]);
    for mut row in x.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
    Ok(kmeans(&x, k, DEFAULT_RESTARTS, seed)?.assignment)
}

/// `Σ_c x_cᵀ(D⁺ − A)x_c / x_cᵀ D̄ x_c`, skipping clusters with zero volume.
pub fn bnc_objective(a: &SymmetricMatrix, assignment: &CommunityAssignment) -> Result<f64> {
    crate::error::check_dim(a.dim(), assignment.n())?;
    let off = off_diagonal(a);
    let dplus = positive_degrees(&off);
    let dbar = signed_laplacians(&off).dbar;
    let labels = assignment.labels();
    let mut num = vec![0.0; assignment.k()];
    let mut den = vec![0.0; assignment.k()];
    for i in 0..a.dim() {
        num[labels[i]] += dplus[i];
        den[labels[i]] += dbar[i];
        for j in 0..a.dim() {
            if labels[i] == labels[j] {
                num[labels[i]] -= off.get(i, j);
            }
        }
    }
    Ok(num.iter().zip(&den).filter(|(_, &d)| d > 0.0).map(|(n, d)| n / d).sum())
}

/// Every baseline of the before/after comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignedAlgorithm {
    Spectral(SpectralVariant),
    Bnc,
}

impl SignedAlgorithm {
    pub const ALL: [SignedAlgorithm; 5] = [
        Self::Spectral(SpectralVariant::Adjacency),
        Self::Spectral(SpectralVariant::Lbar),
        Self::Spectral(SpectralVariant::LbarRw),
        Self::Spectral(SpectralVariant::LbarSym),
        Self::Bnc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Spectral(v) => v.name(),
            Self::Bnc => "bnc",
        }
    }

    pub fn cluster(self, a: &SymmetricMatrix, k: usize, seed: u64) -> Result<CommunityAssignment> {
        match self {
            Self::Spectral(v) => spectral_cluster(a, v, k, seed),
            Self::Bnc => bnc_cluster(a, k, seed),
        }
    }
}

impl std::str::FromStr for SignedAlgorithm {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| invalid(format!("unknown signed clustering algorithm {s:?}")))
    }
}
