mod common;

use common::*;
use graphsdp::metrics::ari;
use graphsdp::models::*;
use graphsdp::signed::*;
use graphsdp::solvers::{pierra_signed, PierraConfig};
use graphsdp::SymmetricMatrix;
use nalgebra::DMatrix;
use rand::Rng;

#[test]
fn signed_laplacian_is_psd_on_random_graphs() {
    let mut r = rng(1);
    for _ in 0..20 {
        let n = 2 + (r.random::<u32>() % 15) as usize;
        let a = SymmetricMatrix::from_upper(n, |i, j| if i == j { 0.0 } else { [-1.0, 0.0, 1.0][(r.random::<u32>() % 3) as usize] });
        let lap = signed_laplacians(&a);
        let (vals, _) = jacobi_eigen(lap.lbar.as_matrix());
        assert!(*vals.last().unwrap() >= -1e-9);
        let (vals, _) = jacobi_eigen(lap.lbar_sym.as_matrix());
        assert!(*vals.last().unwrap() >= -1e-9);
    }
}

#[test]
fn one_dimensional_kmeans_matches_exhaustive_split() {
    let xs = [0.0, 1.0, 10.0, 11.0];
    let points = DMatrix::from_column_slice(4, 1, &xs);
    let res = kmeans(&points, 2, 10, 3).unwrap();
    // Exhaustive search over all non-trivial 2-partitions.
    let mut best = (f64::INFINITY, 0u32);
    for mask in 1u32..(1 << 4) - 1 {
        let mut inertia = 0.0;
        for side in [0, 1] {
            let members: Vec<f64> = (0..4).filter(|&i| (mask >> i) & 1 == side).map(|i| xs[i]).collect();
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            inertia += members.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        }
        if inertia < best.0 {
            best = (inertia, mask);
        }
    }
    assert!((res.inertia - best.0).abs() < 1e-12);
    assert!((res.inertia - 1.0).abs() < 1e-12);
    let l = res.assignment.labels();
    assert!(l[0] == l[1] && l[2] == l[3] && l[0] != l[2]);
}

#[test]
fn bnc_beats_random_partitions() {
    let params = SsbmParams { n: 12, k: 3, p: 0.8, q: 0.2, delta: 0.8, sizes: None };
    let inst = gen_ssbm(&params, 2).unwrap();
    let got = bnc_cluster(&inst.observed, 3, 0).unwrap();
    let value = bnc_objective(&inst.observed, &got).unwrap();
    let mut r = rng(3);
    let mut tried = 0;
    while tried < 50 {
        let raw: Vec<usize> = (0..12).map(|_| (r.random::<u32>() % 3) as usize).collect();
        let Ok(part) = CommunityAssignment::from_raw(&raw) else { continue };
        if part.k() != 3 {
            continue;
        }
        tried += 1;
        assert!(value <= bnc_objective(&inst.observed, &part).unwrap() + 1e-12);
    }
}

#[test]
fn noiseless_bnc_has_zero_objective() {
    let inst = gen_ssbm(&SsbmParams { n: 10, k: 2, p: 1.0, q: 0.0, delta: 1.0, sizes: None }, 0).unwrap();
    let got = bnc_cluster(&inst.observed, 2, 0).unwrap();
    let GroundTruth::Labels(truth) = &inst.truth else { panic!() };
    assert_eq!(ari(&got, truth).unwrap(), 1.0);
    assert!(bnc_objective(&inst.observed, &got).unwrap().abs() < 1e-12);
}

#[test]
fn every_baseline_recovers_noiseless_blocks() {
    for k in 2..=4 {
        let n = 4 * k + 2;
        let inst = gen_ssbm(&SsbmParams { n, k, p: 1.0, q: 0.0, delta: 1.0, sizes: None }, k as u64).unwrap();
        let GroundTruth::Labels(truth) = &inst.truth else { panic!() };
        for alg in SignedAlgorithm::ALL {
            let got = alg.cluster(&inst.observed, k, 1).unwrap();
            assert!((ari(&got, truth).unwrap() - 1.0).abs() < 1e-12, "{} with K={k}", alg.name());
        }
    }
}

#[test]
fn adjacency_spectral_on_sdp_solution_is_exact_without_noise() {
    let inst = gen_ssbm(&SsbmParams { n: 20, k: 2, p: 1.0, q: 0.0, delta: 1.0, sizes: None }, 4).unwrap();
    let (z, _) = pierra_signed(&inst.observed, inst.shift(), &PierraConfig::default()).unwrap();
    let got = spectral_cluster(&z, SpectralVariant::Adjacency, 2, 0).unwrap();
    let GroundTruth::Labels(truth) = &inst.truth else { panic!() };
    assert!((ari(&got, truth).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn spectral_clustering_is_relabeling_invariant() {
    let params = SsbmParams { n: 30, k: 3, p: 0.9, q: 0.1, delta: 0.7, sizes: None };
    let inst = gen_ssbm(&params, 5).unwrap();
    let GroundTruth::Labels(truth) = &inst.truth else { panic!() };
    let mut r = rng(6);
    let mut perm: Vec<usize> = (0..30).collect();
    for i in (1..30).rev() {
        perm.swap(i, (r.random::<u32>() as usize) % (i + 1));
    }
    // Node i of the permuted graph is node perm[i] of the original.
    let permuted = SymmetricMatrix::from_upper(30, |i, j| inst.observed.get(perm[i], perm[j]));
    let permuted_truth = CommunityAssignment::from_raw(&perm.iter().map(|&p| truth.labels()[p]).collect::<Vec<_>>()).unwrap();
    for v in SpectralVariant::ALL {
        let a = ari(&spectral_cluster(&inst.observed, v, 3, 0).unwrap(), truth).unwrap();
        let b = ari(&spectral_cluster(&permuted, v, 3, 0).unwrap(), &permuted_truth).unwrap();
        assert!((a - b).abs() < 1e-12, "{}: {a} vs {b}", v.name());
    }
}

#[test]
fn kmeans_inertia_never_increases() {
    let mut r = rng(7);
    let points = DMatrix::from_fn(60, 3, |_, _| r.random::<f64>());
    for seed in 0..5 {
        let res = kmeans(&points, 4, 3, seed).unwrap();
        assert!(res.inertia_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}
