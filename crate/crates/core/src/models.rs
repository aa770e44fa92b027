//! Seeded generators for the synthetic models and their exact expectations.
//!
//! Each generator returns the observed matrix together with `E[A]` computed
//! from the parameters (never estimated), the oracle `Z*` when it has a closed
//! form, and the ground truth. Generators are pure functions of
//! `(parameters, seed)`.

use std::f64::consts::TAU;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{HermitianMatrix, Scalar, SelfAdjoint, SymmetricMatrix};
use crate::rng::{stream_rng, streams};
use crate::solvers::ConstraintAtom;

/// Feasibility slack used when validating an oracle at construction.
const ORACLE_FEAS_TOL: f64 = 1e-9;

/// Per-node community labels in `0..k`; every community is non-empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct CommunityAssignment {
    labels: Vec<usize>,
    k: usize,
}

impl CommunityAssignment {
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid("assignment must label at least one node"));
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; k];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return Err(invalid(format!("community {empty} is empty")));
        }
        Ok(Self { labels, k })
    }

    /// Relabels arbitrary labels to `0..k` in order of first appearance.
    pub fn from_raw(raw: &[usize]) -> Result<Self> {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Self::new(labels)
    }

    /// Contiguous blocks of the given sizes.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.iter().any(|&s| s == 0) {
            return Err(invalid("community sizes must be positive"));
        }
        Self::new(sizes.iter().enumerate().flat_map(|(c, &s)| std::iter::repeat_n(c, s)).collect())
    }

    /// `k` contiguous blocks as equal as possible (larger blocks first).
    pub fn balanced(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(invalid(format!("cannot split {n} nodes into {k} communities")));
        }
        Self::from_sizes(&balanced_sizes(n, k))
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    /// `λ = Σ_k l_k²`, the number of ones in the membership matrix.
    pub fn lambda(&self) -> f64 {
        self.sizes().iter().map(|&s| (s * s) as f64).sum()
    }

    pub fn same(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }
}

impl TryFrom<Vec<usize>> for CommunityAssignment {
    type Error = crate::Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CommunityAssignment> for Vec<usize> {
    fn from(a: CommunityAssignment) -> Self {
        a.labels
    }
}

pub(crate) fn balanced_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|c| n / k + usize::from(c < n % k)).collect()
}

/// A cut encoded as per-node signs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct CutVector(Vec<i8>);

impl CutVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(invalid("cut vector entries must be +1 or -1"));
        }
        Ok(Self(signs))
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Side labels `0`/`1` for partition metrics.
    pub fn as_labels(&self) -> Vec<usize> {
        self.0.iter().map(|&s| usize::from(s < 0)).collect()
    }
}

impl TryFrom<Vec<i8>> for CutVector {
    type Error = crate::Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CutVector> for Vec<i8> {
    fn from(c: CutVector) -> Self {
        c.0
    }
}

/// Which of the four estimation problems an instance belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Community,
    Signed,
    Sync,
    Maxcut,
}

impl std::str::FromStr for ProblemKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "community" => Ok(Self::Community),
            "signed" => Ok(Self::Signed),
            "sync" => Ok(Self::Sync),
            "maxcut" => Ok(Self::Maxcut),
            other => Err(invalid(format!("unknown problem {other:?}"))),
        }
    }
}

/// Signed stochastic block model parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsbmParams {
    pub n: usize,
    pub k: usize,
    /// Probability that a within-cluster edge is positive.
    pub p: f64,
    /// Probability that an across-cluster edge is positive.
    pub q: f64,
    /// Edge-sampling probability.
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
}

impl SsbmParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.q) || !(self.p > 0.5 && self.p <= 1.0) {
            return Err(invalid(format!("need 0 <= q < 1/2 < p <= 1, got p={}, q={}", self.p, self.q)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(invalid(format!("need 0 < delta <= 1, got {}", self.delta)));
        }
        self.assignment().map(|_| ())
    }

    /// `α = δ(p + q − 1)`, the shift making `Z*` the oracle of `⟨E A − αJ, ·⟩`.
    pub fn alpha(&self) -> f64 {
        self.delta * (self.p + self.q - 1.0)
    }

    /// Curvature constant `θ = δ(p − q)`.
    pub fn theta(&self) -> f64 {
        self.delta * (self.p - self.q)
    }

    pub fn assignment(&self) -> Result<CommunityAssignment> {
        assignment_for(self.n, self.k, self.sizes.as_deref())
    }
}

fn assignment_for(n: usize, k: usize, sizes: Option<&[usize]>) -> Result<CommunityAssignment> {
    match sizes {
        Some(s) => {
            if s.len() != k {
                return Err(invalid(format!("{} sizes given for {k} communities", s.len())));
            }
            if s.iter().sum::<usize>() != n {
                return Err(invalid(format!("community sizes sum to {}, not n = {n}", s.iter().sum::<usize>())));
            }
            CommunityAssignment::from_sizes(s)
        }
        None => CommunityAssignment::balanced(n, k),
    }
}

/// Stochastic block model parameters (`p` within, `q` across).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
}

/// Noise on the pairwise offsets of the synchronization model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseModel {
    Gaussian,
    /// With probability `gamma` the offset is replaced by a uniform angle.
    Outlier { gamma: f64 },
}

/// Synchronization model parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncParams {
    pub n: usize,
    pub sigma: f64,
    pub noise: NoiseModel,
    pub sample_prob: f64,
    /// Ground-truth angles; drawn uniformly on `[0, 2π)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
}

impl SyncParams {
    pub fn gaussian(n: usize, sigma: f64) -> Self {
        Self { n, sigma, noise: NoiseModel::Gaussian, sample_prob: 1.0, phases: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be positive"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(invalid(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if let NoiseModel::Outlier { gamma } = self.noise {
            if !(0.0..=1.0).contains(&gamma) {
                return Err(invalid(format!("gamma must lie in [0, 1], got {gamma}")));
            }
        }
        if !(self.sample_prob > 0.0 && self.sample_prob <= 1.0) {
            return Err(invalid(format!("sample_prob must lie in (0, 1], got {}", self.sample_prob)));
        }
        if let Some(ph) = &self.phases {
            if ph.len() != self.n {
                return Err(invalid(format!("{} phases given for n = {}", ph.len(), self.n)));
            }
        }
        Ok(())
    }

    /// `E[A_ij] / Z*_ij` off the diagonal.
    pub fn attenuation(&self) -> f64 {
        let outlier = match self.noise {
            NoiseModel::Gaussian => 1.0,
            NoiseModel::Outlier { gamma } => 1.0 - gamma,
        };
        self.sample_prob * outlier * (-self.sigma * self.sigma / 2.0).exp()
    }
}

/// Generator parameters echoed into instance metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    Sbm(SbmParams),
    Ssbm(SsbmParams),
    Sync(SyncParams),
    Bipartite { n: usize, eta: f64, delta: f64 },
    Masked { n: usize, p: f64 },
}

/// Ground truth carried by an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum GroundTruth {
    Labels(CommunityAssignment),
    Phases(Vec<f64>),
    Partition(CutVector),
    None,
}

/// A generated estimation problem: data, exact expectation, oracle and truth.
#[derive(Clone, Debug)]
pub struct ProblemInstance<T: Scalar> {
    pub kind: ProblemKind,
    pub observed: SelfAdjoint<T>,
    pub expected: SelfAdjoint<T>,
    pub oracle: Option<SelfAdjoint<T>>,
    pub truth: GroundTruth,
    pub params: ModelParams,
    pub seed: u64,
}

impl<T: Scalar> ProblemInstance<T> {
    pub fn n(&self) -> usize {
        self.observed.dim()
    }

    /// The constraint set of the SDP estimator for this problem.
    pub fn atoms(&self) -> Vec<ConstraintAtom<T>> {
        match (&self.kind, &self.params) {
            (ProblemKind::Community, ModelParams::Sbm(p)) => {
                let lambda = assignment_for(p.n, p.k, p.sizes.as_deref()).map(|a| a.lambda()).unwrap_or(0.0);
                community_atoms(lambda)
            }
            (ProblemKind::Community, _) => community_atoms(self.oracle.as_ref().map_or(0.0, |z| z.entry_sum())),
            (ProblemKind::Signed, _) => signed_atoms(),
            (ProblemKind::Sync | ProblemKind::Maxcut, _) => elliptope_atoms(),
        }
    }

    /// Shift removed from the data before maximizing: `α` for signed
    /// clustering, zero otherwise.
    pub fn shift(&self) -> f64 {
        match &self.params {
            ModelParams::Ssbm(p) => p.alpha(),
            _ => 0.0,
        }
    }

    /// The matrix whose inner product with `Z` the estimator maximizes.
    pub fn objective(&self) -> SelfAdjoint<T> {
        shifted(&self.observed, self.shift())
    }

    /// The population objective `E[A] − shift·J`.
    pub fn expected_objective(&self) -> SelfAdjoint<T> {
        shifted(&self.expected, self.shift())
    }

    /// Checks that the oracle lies in the constraint set.
    pub fn validate_oracle(&self) -> Result<()> {
        let Some(z) = &self.oracle else { return Ok(()) };
        for atom in self.atoms() {
            let r = atom.residual(z)?;
            if r > ORACLE_FEAS_TOL {
                return Err(invalid(format!("oracle violates {} by {r:e}", atom.name())));
            }
        }
        Ok(())
    }
}

pub(crate) fn shifted<T: Scalar>(m: &SelfAdjoint<T>, shift: f64) -> SelfAdjoint<T> {
    if shift == 0.0 {
        m.clone()
    } else {
        m.map(|x| x - T::from_real(shift))
    }
}

pub fn community_atoms<T: Scalar>(lambda: f64) -> Vec<ConstraintAtom<T>> {
    vec![ConstraintAtom::Psd, ConstraintAtom::NonNeg, ConstraintAtom::DiagLeqOne, ConstraintAtom::TotalSumLeq(lambda)]
}

pub fn signed_atoms<T: Scalar>() -> Vec<ConstraintAtom<T>> {
    vec![ConstraintAtom::Psd, ConstraintAtom::Box01, ConstraintAtom::DiagEqOne]
}

/// `{Z ⪰ 0, diag(Z) = 1}`.
pub fn elliptope_atoms<T: Scalar>() -> Vec<ConstraintAtom<T>> {
    vec![ConstraintAtom::Psd, ConstraintAtom::DiagEqOne]
}

/// Exact 0/1 membership matrix `Z̄_ij = 1{i ∼ j}`.
pub fn oracle_membership(assignment: &CommunityAssignment) -> SymmetricMatrix {
    SymmetricMatrix::from_upper(assignment.n(), |i, j| if assignment.same(i, j) { 1.0 } else { 0.0 })
}

/// Phase Gram matrix `x x*` with `x_i = e^{ιθ_i}`.
pub fn oracle_sync(phases: &[f64]) -> Result<HermitianMatrix> {
    if phases.is_empty() {
        return Err(invalid("at least one phase is required"));
    }
    Ok(HermitianMatrix::outer(&unit_phasors(phases)))
}

pub fn unit_phasors(phases: &[f64]) -> DVector<Complex64> {
    DVector::from_iterator(phases.len(), phases.iter().map(|&t| Complex64::from_polar(1.0, t)))
}

fn check_prob(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in [0, 1], got {x}")))
    }
}

/// Stochastic block model with `p` within communities, `q` across and
/// self-loops with probability one.
pub fn gen_sbm(params: &SbmParams, seed: u64) -> Result<ProblemInstance<f64>> {
    check_prob("p", params.p)?;
    check_prob("q", params.q)?;
    if params.q >= params.p {
        return Err(invalid(format!("need q < p, got p={}, q={}", params.p, params.q)));
    }
    let assignment = assignment_for(params.n, params.k, params.sizes.as_deref())?;
    let prob = |i: usize, j: usize| {
        if i == j {
            1.0
        } else if assignment.same(i, j) {
            params.p
        } else {
            params.q
        }
    };
    let mut edges = stream_rng(seed, streams::EDGES);
    let observed = SymmetricMatrix::from_upper(params.n, |i, j| {
        let u: f64 = edges.random();
        if u < prob(i, j) {
            1.0
        } else {
            0.0
        }
    });
    let inst = ProblemInstance {
        kind: ProblemKind::Community,
        observed,
        expected: SymmetricMatrix::from_upper(params.n, prob),
        oracle: Some(oracle_membership(&assignment)),
        truth: GroundTruth::Labels(assignment),
        params: ModelParams::Sbm(params.clone()),
        seed,
    };
    inst.validate_oracle()?;
    Ok(inst)
}

/// Signed stochastic block model: `A_ij = s_ij (2 B_ij − 1)` above the
/// diagonal and `A_ii = 1`.
pub fn gen_ssbm(params: &SsbmParams, seed: u64) -> Result<ProblemInstance<f64>> {
    params.validate()?;
    let assignment = params.assignment()?;
    let mut coins = stream_rng(seed, streams::EDGES);
    let mut sampling = stream_rng(seed, streams::SAMPLING);
    let observed = SymmetricMatrix::from_upper(params.n, |i, j| {
        if i == j {
            return 1.0;
        }
        let positive_prob = if assignment.same(i, j) { params.p } else { params.q };
        let b: f64 = coins.random();
        let s: f64 = sampling.random();
        let sign = if b < positive_prob { 1.0 } else { -1.0 };
        if s < params.delta {
            sign
        } else {
            0.0
        }
    });
    let expected = SymmetricMatrix::from_upper(params.n, |i, j| {
        if i == j {
            1.0
        } else if assignment.same(i, j) {
            params.delta * (2.0 * params.p - 1.0)
        } else {
            params.delta * (2.0 * params.q - 1.0)
        }
    });
    let inst = ProblemInstance {
        kind: ProblemKind::Signed,
        observed,
        expected,
        oracle: Some(oracle_membership(&assignment)),
        truth: GroundTruth::Labels(assignment),
        params: ModelParams::Ssbm(params.clone()),
        seed,
    };
    inst.validate_oracle()?;
    Ok(inst)
}

/// Angular synchronization: `A_ij = x_i conj(x_j) e^{ι σ g_ij}` on observed
/// pairs, zero on unobserved pairs, one on the diagonal.
pub fn gen_sync(params: &SyncParams, seed: u64) -> Result<ProblemInstance<Complex64>> {
    params.validate()?;
    let n = params.n;
    let phases = match &params.phases {
        Some(p) => p.clone(),
        None => {
            let mut latent = stream_rng(seed, streams::LATENT);
            (0..n).map(|_| latent.random::<f64>() * TAU).collect()
        }
    };
    let mut noise = stream_rng(seed, streams::NOISE);
    let mut outliers = stream_rng(seed, streams::OUTLIERS);
    let mut sampling = stream_rng(seed, streams::SAMPLING);
    let observed = HermitianMatrix::from_upper(n, |i, j| {
        if i == j {
            return Complex64::new(1.0, 0.0);
        }
        let g: f64 = noise.sample(StandardNormal);
        let (u, v): (f64, f64) = (outliers.random(), outliers.random());
        let s: f64 = sampling.random();
        let clean = phases[i] - phases[j] + params.sigma * g;
        let offset = match params.noise {
            NoiseModel::Outlier { gamma } if u < gamma => v * TAU,
            _ => clean,
        };
        if s < params.sample_prob {
            Complex64::from_polar(1.0, offset)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let oracle = oracle_sync(&phases)?;
    let att = params.attenuation();
    let expected = oracle.map_upper(|i, j, z| if i == j { z } else { z * att });
    let inst = ProblemInstance {
        kind: ProblemKind::Sync,
        observed,
        expected,
        oracle: Some(oracle),
        truth: GroundTruth::Phases(phases),
        params: ModelParams::Sync(params.clone()),
        seed,
    };
    inst.validate_oracle()?;
    Ok(inst)
}

/// A MAX-CUT instance observed through a random edge mask.
#[derive(Clone, Debug)]
pub struct MaxCutInstance {
    /// `A⁰`, symmetric with zero diagonal.
    pub full: SymmetricMatrix,
    /// `A = S ∘ A⁰`.
    pub observed: SymmetricMatrix,
    pub mask_prob: f64,
    /// `B = −A / p`, so that `E[B] = −A⁰`.
    pub rescaled: SymmetricMatrix,
    pub partition: Option<CutVector>,
    pub params: ModelParams,
    pub seed: u64,
}

impl MaxCutInstance {
    /// `E[B] = −A⁰`.
    pub fn expected_rescaled(&self) -> SymmetricMatrix {
        self.full.scale(-1.0)
    }

    /// The SDP view: maximize `⟨B, Z⟩` over the elliptope. No closed-form
    /// oracle exists, so `oracle` is `None`.
    pub fn to_problem(&self) -> ProblemInstance<f64> {
        ProblemInstance {
            kind: ProblemKind::Maxcut,
            observed: self.rescaled.clone(),
            expected: self.expected_rescaled(),
            oracle: None,
            truth: self.partition.clone().map_or(GroundTruth::None, GroundTruth::Partition),
            params: self.params.clone(),
            seed: self.seed,
        }
    }
}

fn check_graph(a0: &SymmetricMatrix) -> Result<()> {
    if a0.diagonal().iter().any(|&d| d != 0.0) {
        return Err(invalid("graph adjacency must have a zero diagonal"));
    }
    Ok(())
}

/// Keeps each edge of `A⁰` independently with probability `p`.
pub fn apply_mask(a0: &SymmetricMatrix, p: f64, seed: u64) -> Result<MaxCutInstance> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("mask probability must lie in (0, 1], got {p}")));
    }
    check_graph(a0)?;
    let mut mask = stream_rng(seed, streams::MASK);
    let observed = a0.map_upper(|i, j, w| {
        if i == j {
            return 0.0;
        }
        let u: f64 = mask.random();
        if u < p {
            w
        } else {
            0.0
        }
    });
    let rescaled = observed.scale(-1.0 / p);
    Ok(MaxCutInstance {
        full: a0.clone(),
        observed,
        mask_prob: p,
        rescaled,
        partition: None,
        params: ModelParams::Masked { n: a0.dim(), p },
        seed,
    })
}

/// Complete bipartite graph between the two halves plus Bernoulli(`eta`)
/// edges inside each half, observed through a Bernoulli(`delta`) mask.
pub fn gen_bipartite_perturbed(n: usize, eta: f64, delta: f64, seed: u64) -> Result<MaxCutInstance> {
    if n == 0 || n % 2 != 0 {
        return Err(invalid(format!("n must be a positive even number, got {n}")));
    }
    check_prob("eta", eta)?;
    check_prob("delta", delta)?;
    if delta == 0.0 {
        return Err(invalid("delta must be positive"));
    }
    let half = n / 2;
    let mut perturb = stream_rng(seed, streams::PERTURB);
    let full = SymmetricMatrix::from_upper(n, |i, j| {
        if i == j {
            0.0
        } else if (i < half) != (j < half) {
            1.0
        } else {
            let u: f64 = perturb.random();
            if u < eta {
                1.0
            } else {
                0.0
            }
        }
    });
    let mut inst = apply_mask(&full, delta, seed)?;
    inst.partition = Some(CutVector::new((0..n).map(|i| if i < half { 1 } else { -1 }).collect())?);
    inst.params = ModelParams::Bipartite { n, eta, delta };
    Ok(inst)
}

/// Erdős–Rényi graph `G(n, prob)` with unit weights and no self-loops.
pub fn erdos_renyi(n: usize, prob: f64, seed: u64) -> Result<SymmetricMatrix> {
    check_prob("prob", prob)?;
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let mut edges = stream_rng(seed, streams::EDGES);
    Ok(SymmetricMatrix::from_upper(n, |i, j| {
        if i == j {
            return 0.0;
        }
        let u: f64 = edges.random();
        if u < prob {
            1.0
        } else {
            0.0
        }
    }))
}
