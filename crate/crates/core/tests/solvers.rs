mod common;

use common::*;
use graphsdp::linalg::frobenius_inner;
use graphsdp::models::*;
use graphsdp::solvers::*;
use graphsdp::{HermitianMatrix, Scalar, SelfAdjoint, SymmetricMatrix};
use num_complex::Complex64;
use proptest::prelude::*;

fn real_atoms(n: usize, r: &mut impl rand::Rng) -> Vec<ConstraintAtom<f64>> {
    vec![
        ConstraintAtom::Psd,
        ConstraintAtom::NonNeg,
        ConstraintAtom::Box01,
        ConstraintAtom::DiagLeqOne,
        ConstraintAtom::DiagEqOne,
        ConstraintAtom::TotalSumLeq(1.5),
        ConstraintAtom::halfspace(random_symmetric(n, r), 0.3),
        ConstraintAtom::l1_ball(random_symmetric(n, r), 2.0),
        ConstraintAtom::l2_ball(random_symmetric(n, r), 1.0),
    ]
}

fn complex_atoms(n: usize, r: &mut impl rand::Rng) -> Vec<ConstraintAtom<Complex64>> {
    vec![
        ConstraintAtom::Psd,
        ConstraintAtom::DiagLeqOne,
        ConstraintAtom::DiagEqOne,
        ConstraintAtom::TotalSumLeq(0.5),
        ConstraintAtom::halfspace(random_hermitian(n, r), -0.2),
        ConstraintAtom::l1_ball(random_hermitian(n, r), 1.5),
        ConstraintAtom::l2_ball(random_hermitian(n, r), 0.7),
    ]
}

/// Idempotence, non-expansiveness and the projection variational inequality
/// `⟨Y − P(Y), X − P(Y)⟩ ≤ 0` for feasible `X`.
fn check_atom<T: Scalar>(atom: &ConstraintAtom<T>, x: &SelfAdjoint<T>, y: &SelfAdjoint<T>) -> Result<(), TestCaseError> {
    let px = atom.project(x).unwrap();
    let py = atom.project(y).unwrap();
    let ppx = atom.project(&px).unwrap();
    let scale = 1.0 + px.frobenius_norm();
    prop_assert!((&ppx - &px).frobenius_norm() <= 1e-12 * scale, "{} not idempotent", atom.name());
    prop_assert!(
        (&px - &py).frobenius_norm() <= (x - y).frobenius_norm() + 1e-10 * scale,
        "{} expands distances",
        atom.name()
    );
    let vi = frobenius_inner(&(y - &py), &(&px - &py)).unwrap();
    prop_assert!(vi <= 1e-9 * (1.0 + x.frobenius_norm() + y.frobenius_norm()).powi(2), "{}: {vi}", atom.name());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn real_atom_projections(n in 1usize..7, seed in any::<u64>()) {
        let mut r = rng(seed);
        let atoms = real_atoms(n, &mut r);
        for atom in &atoms {
            let x = random_symmetric(n, &mut r).scale(2.0);
            let y = random_symmetric(n, &mut r).scale(2.0);
            check_atom(atom, &x, &y)?;
        }
    }

    #[test]
    fn complex_atom_projections(n in 1usize..6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let atoms = complex_atoms(n, &mut r);
        for atom in &atoms {
            let x = random_hermitian(n, &mut r);
            let y = random_hermitian(n, &mut r);
            check_atom(atom, &x, &y)?;
        }
    }
}

#[test]
fn two_node_solution_matches_grid_search() {
    let a = SymmetricMatrix::from_upper(2, |i, j| if i == j { 0.0 } else { 1.0 });
    // Feasible points are [[1, t], [t, 1]] with |t| ≤ 1; objective 2t.
    let (t_best, v_best) = (0..=2000)
        .map(|k| -1.0 + k as f64 / 1000.0)
        .map(|t| (t, 2.0 * t))
        .fold((0.0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    let (z, rep) = pierra_solve(&a, &elliptope_atoms(), &PierraConfig::default()).unwrap();
    assert!(rep.converged());
    assert!((z.get(0, 1) - t_best).abs() <= 1e-3);
    assert!((rep.objective - v_best).abs() <= 1e-3);
}

#[test]
fn noiseless_community_recovers_membership() {
    let params = SbmParams { n: 8, k: 2, p: 1.0, q: 0.0, sizes: None };
    let inst = gen_sbm(&params, 0).unwrap();
    let cfg = PierraConfig::default();
    let (z, rep) = pierra_community(&inst.observed, 32.0, &cfg).unwrap();
    assert!(rep.converged());
    assert!((&z - inst.oracle.as_ref().unwrap()).max_abs() <= 1e-3);
    assert!(max_residual(&community_atoms(32.0), &z).unwrap() <= cfg.feas_tol);
}

#[test]
fn vacuous_cap_on_identity_saturates_diagonal() {
    let (z, rep) = pierra_community(&SymmetricMatrix::identity(6), 36.0, &PierraConfig::default()).unwrap();
    assert!(rep.converged());
    assert!((frobenius_inner(&SymmetricMatrix::identity(6), &z).unwrap() - 6.0).abs() <= 1e-4);
}

#[test]
fn signed_solution_is_boxed_and_reaches_oracle_value() {
    let inst = gen_ssbm(&SsbmParams { n: 8, k: 2, p: 1.0, q: 0.0, delta: 1.0, sizes: None }, 3).unwrap();
    let zs = inst.oracle.clone().unwrap();
    let alpha = inst.shift();
    assert_eq!(alpha, 0.0);
    let (z, rep) = pierra_signed(&inst.observed, alpha, &PierraConfig::default()).unwrap();
    assert!(rep.converged());
    assert!(rep.objective >= frobenius_inner(&inst.observed, &zs).unwrap() - 1e-6);
    assert!(z.as_matrix().iter().all(|&x| (-1e-6..=1.0 + 1e-6).contains(&x)));
    assert!((&z - &zs).max_abs() <= 1e-3);
}

/// `⟨M, Ẑ⟩ ≥ ⟨M, Z⟩ − 10·feas_tol·‖M‖_F` for random feasible `Z`.
fn assert_optimal_against<T: Scalar>(m: &SelfAdjoint<T>, z_hat: &SelfAdjoint<T>, feas_tol: f64, others: &[SelfAdjoint<T>]) {
    let got = frobenius_inner(m, z_hat).unwrap();
    for z in others {
        let v = frobenius_inner(m, z).unwrap();
        assert!(got >= v - 10.0 * feas_tol * m.frobenius_norm(), "{got} < {v}");
    }
}

#[test]
fn pierra_beats_random_feasible_points() {
    let cfg = PierraConfig::default();
    let mut r = rng(21);

    let g = random_graph(10, 0.5, &mut r).scale(-1.0);
    let (z, rep) = pierra_solve(&g, &elliptope_atoms(), &cfg).unwrap();
    assert!(rep.converged());
    let others: Vec<_> = (0..50).map(|_| random_elliptope(10, &mut r)).collect();
    assert_optimal_against(&g, &z, cfg.feas_tol, &others);

    let inst = gen_ssbm(&SsbmParams { n: 12, k: 3, p: 0.8, q: 0.2, delta: 0.7, sizes: None }, 4).unwrap();
    let m = inst.objective();
    let (z, _) = pierra_solve(&m, &signed_atoms(), &cfg).unwrap();
    let zs = inst.oracle.clone().unwrap();
    let others: Vec<_> = (0..50).map(|_| random_signed_feasible(&zs, &mut r)).collect();
    assert_optimal_against(&m, &z, cfg.feas_tol, &others);

    let inst = gen_sbm(&SbmParams { n: 12, k: 2, p: 0.7, q: 0.2, sizes: None }, 5).unwrap();
    let GroundTruth::Labels(labels) = &inst.truth else { panic!() };
    let (z, _) = pierra_community(&inst.observed, labels.lambda(), &cfg).unwrap();
    let zs = inst.oracle.clone().unwrap();
    let others: Vec<_> = (0..50).map(|_| random_community_feasible(&zs, labels.lambda(), &mut r)).collect();
    assert_optimal_against(&inst.observed, &z, cfg.feas_tol, &others);

    let inst = gen_sync(&SyncParams::gaussian(8, 0.8), 6).unwrap();
    let (z, _) = pierra_solve(&inst.observed, &elliptope_atoms(), &cfg).unwrap();
    let zs = inst.oracle.clone().unwrap();
    let others: Vec<HermitianMatrix> = (0..50).map(|_| random_sync_feasible(&zs, &mut r)).collect();
    assert_optimal_against(&inst.observed, &z, cfg.feas_tol, &others);
}

/// For `max ⟨M, Z⟩` over the elliptope, `y_i = (MZ)_ii` and `S = Diag(y) − M`
/// form a dual certificate: `S ⪰ 0` and `⟨S, Z⟩ = 0` at the optimum.
#[test]
fn elliptope_solution_has_dual_certificate() {
    for seed in 0..5 {
        let m = random_symmetric(10, &mut rng(seed));
        let (z, rep) = pierra_solve(&m, &elliptope_atoms(), &PierraConfig::default()).unwrap();
        assert!(rep.converged());
        let mz = m.as_matrix() * z.as_matrix();
        let y: Vec<f64> = (0..10).map(|i| mz[(i, i)]).collect();
        let s = &SymmetricMatrix::from_diagonal(&y) - &m;
        let (vals, _) = jacobi_eigen(s.as_matrix());
        let scale = m.frobenius_norm();
        assert!(vals[9] >= -1e-3 * scale, "seed {seed}: λ_min(S) = {}", vals[9]);
        assert!(frobenius_inner(&s, &z).unwrap().abs() <= 1e-3 * scale);
    }
}

#[test]
fn bm_agrees_with_pierra_on_maxcut() {
    for seed in 0..5 {
        let a0 = random_graph(10, 0.5, &mut rng(100 + seed));
        let (_, rep) = pierra_solve(&a0.scale(-1.0), &elliptope_atoms(), &PierraConfig::default()).unwrap();
        let bm = bm_solve(&a0, Sense::Min, &BmConfig { seed, ..Default::default() }).unwrap();
        assert!(bm.report.converged());
        let (a, b) = (-rep.objective, bm.report.objective);
        assert!((a - b).abs() <= 1e-3 * a.abs().max(1.0), "seed {seed}: pierra {a}, bm {b}");
    }
}

#[test]
fn full_rank_bm_reproduces_pierra() {
    let m = random_symmetric(12, &mut rng(8));
    let (_, rep) = pierra_solve(&m, &elliptope_atoms(), &PierraConfig::default()).unwrap();
    let bm = bm_solve(&m, Sense::Max, &BmConfig { rank: Some(12), ..Default::default() }).unwrap();
    assert!((rep.objective - bm.report.objective).abs() <= 1e-3 * rep.objective.abs());

    let inst = gen_sync(&SyncParams::gaussian(10, 1.0), 2).unwrap();
    let (_, rep) = pierra_solve(&inst.observed, &elliptope_atoms(), &PierraConfig::default()).unwrap();
    let bm = bm_solve(&inst.observed, Sense::Max, &BmConfig { rank: Some(10), ..Default::default() }).unwrap();
    assert!((rep.objective - bm.report.objective).abs() <= 1e-3 * rep.objective.abs());
}

#[test]
fn reports_are_deterministic() {
    let m = random_symmetric(9, &mut rng(1));
    let cfg = PierraConfig::default();
    let (z1, r1) = pierra_solve(&m, &elliptope_atoms(), &cfg).unwrap();
    let (z2, r2) = pierra_solve(&m, &elliptope_atoms(), &cfg).unwrap();
    assert_eq!(z1, z2);
    assert_eq!(r1, r2);
    let b = BmConfig { seed: 4, ..Default::default() };
    let s1 = bm_solve(&m, Sense::Max, &b).unwrap();
    let s2 = bm_solve(&m, Sense::Max, &b).unwrap();
    assert_eq!(s1.y, s2.y);
    assert_eq!(s1.report, s2.report);
}

#[test]
fn rank_defaults() {
    assert_eq!(bm_rank(2), 2);
    assert_eq!(bm_rank(500), 32);
    assert_eq!(bm_rank(1000), 45);
    for n in 1..3000 {
        let p = bm_rank(n);
        assert!(p * p >= 2 * n && (p - 1) * (p - 1) < 2 * n);
    }
}
