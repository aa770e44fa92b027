//! Independent oracles and random feasible points shared by the integration tests.
#![allow(dead_code)]

use graphsdp::{HermitianMatrix, SymmetricMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Cyclic Jacobi eigenvalue iteration on a dense symmetric matrix.
/// Returns eigenvalues (descending) and the matching eigenvector columns.
pub fn jacobi_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off < 1e-30 * (1.0 + a.norm_squared()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Real `2n × 2n` embedding `[[Re, −Im], [Im, Re]]`; each eigenvalue of the
/// Hermitian matrix appears twice in its spectrum.
pub fn real_embedding(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let x = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => x.re,
            (true, false) => -x.im,
            (false, true) => x.im,
        }
    })
}

/// Eigenvalues of a Hermitian matrix via the real embedding, descending.
pub fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    let (vals, _) = jacobi_eigen(&real_embedding(h));
    vals.iter().step_by(2).copied().collect()
}

/// Oracle PSD projection: clamp the Jacobi spectrum.
pub fn psd_oracle(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (vals, v) = jacobi_eigen(m);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|x| x.max(0.0))));
    &v * d * v.transpose()
}

pub fn random_symmetric(n: usize, r: &mut impl Rng) -> SymmetricMatrix {
    SymmetricMatrix::from_upper(n, |_, _| r.sample(StandardNormal))
}

pub fn random_hermitian(n: usize, r: &mut impl Rng) -> HermitianMatrix {
    HermitianMatrix::from_upper(n, |i, j| {
        let re: f64 = r.sample(StandardNormal);
        let im: f64 = if i == j { 0.0 } else { r.sample(StandardNormal) };
        Complex64::new(re, im)
    })
}

/// Gram matrix of `n` random unit rows of width `p`; `nonneg` takes absolute
/// values first so every entry is in `[0, 1]`.
pub fn random_gram(n: usize, p: usize, nonneg: bool, r: &mut impl Rng) -> SymmetricMatrix {
    let mut y = DMatrix::<f64>::from_fn(n, p, |_, _| {
        let g: f64 = r.sample(StandardNormal);
        if nonneg {
            g.abs()
        } else {
            g
        }
    });
    for mut row in y.row_iter_mut() {
        let norm = row.norm();
        row /= norm;
    }
    SymmetricMatrix::gram(&y)
}

/// Random point of the elliptope `{Z ⪰ 0, diag(Z) = 1}`.
pub fn random_elliptope(n: usize, r: &mut impl Rng) -> SymmetricMatrix {
    let p = r.random_range(1..=n.max(2));
    random_gram(n, p, false, r)
}

/// Random point of `{Z ⪰ 0, 0 ≤ Z ≤ 1, diag(Z) = 1}`, mixed with `anchor`
/// (itself feasible) so that some draws land close to it.
pub fn random_signed_feasible(anchor: &SymmetricMatrix, r: &mut impl Rng) -> SymmetricMatrix {
    let n = anchor.dim();
    let p = r.random_range(1..=n.max(2));
    let g = random_gram(n, p, true, r);
    let t: f64 = r.random();
    anchor.scale(t).add_scaled(1.0 - t, &g)
}

/// Random point of `{Z ⪰ 0, Z ≥ 0, diag(Z) ≤ 1, Σ Z ≤ λ}` mixed with `anchor`.
pub fn random_community_feasible(anchor: &SymmetricMatrix, lambda: f64, r: &mut impl Rng) -> SymmetricMatrix {
    let n = anchor.dim();
    let p = r.random_range(1..=n.max(2));
    let g = random_gram(n, p, true, r);
    let scale = (lambda / g.entry_sum()).min(1.0) * r.random::<f64>();
    let t: f64 = r.random();
    anchor.scale(t).add_scaled(1.0 - t, &g.scale(scale))
}

/// Random Hermitian point with unit diagonal: Gram of complex unit rows,
/// mixed with `anchor`.
pub fn random_sync_feasible(anchor: &HermitianMatrix, r: &mut impl Rng) -> HermitianMatrix {
    let n = anchor.dim();
    let p = r.random_range(1..=n.max(2));
    let mut y = DMatrix::<Complex64>::from_fn(n, p, |_, _| Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal)));
    for mut row in y.row_iter_mut() {
        let norm = row.norm();
        row /= Complex64::new(norm, 0.0);
    }
    let g = HermitianMatrix::gram(&y);
    let t: f64 = r.random();
    anchor.scale(t).add_scaled(1.0 - t, &g)
}

/// Random unit-weight graph on `n` nodes with edge probability `prob`.
pub fn random_graph(n: usize, prob: f64, r: &mut impl Rng) -> SymmetricMatrix {
    SymmetricMatrix::from_upper(n, |i, j| if i != j && r.random::<f64>() < prob { 1.0 } else { 0.0 })
}

/// Exhaustive maximum cut over all `2^n` sign vectors, by direct edge counting.
pub fn enumerate_maxcut(a0: &SymmetricMatrix) -> f64 {
    let n = a0.dim();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        let mut cut = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                if ((mask >> i) & 1) != ((mask >> j) & 1) {
                    cut += a0.get(i, j);
                }
            }
        }
        best = f64::max(best, cut);
    }
    best
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
