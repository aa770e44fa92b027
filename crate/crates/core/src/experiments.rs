//! Seeded parameter sweeps producing per-replicate and aggregated CSV tables.
//!
//! Every experiment is a grid of parameter cells times a number of
//! replicates. The seed of cell `(i₁, …, i_d)` and replicate `r` is
//! `derive_seed(master, [i₁, …, i_d, r])`, so extending a grid never changes
//! existing cells. Cells run in parallel and rows are written sorted by
//! `(cell, replicate)`, so the output does not depend on scheduling.
//!
//! Files written under an output prefix `P`:
//! - `P.rows.csv`: `cell, <axes>, replicate, seed, status, message, <metrics>`
//! - `P.summary.csv`: `cell, <axes>, <metric>_mean, <metric>_std, <metric>_count`
//! - `P.json`: the resolved configuration and experiment-specific extras.
//!
//! A failing cell is recorded with `status = error` and empty metrics; the
//! sweep carries on. `status = max_iters` marks rows whose solver hit its
//! iteration cap; their metrics are still reported and aggregated.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{invalid, Result};
use crate::fixed_point::{
    geometric_grid, replicate_curves, summarize_curves, FixedPointConfig, FixedPointEstimate, Localization, Replicate,
};
use crate::gset::{parse_gset, GsetGraph};
use crate::io::{with_suffix, write_json, write_text};
use crate::linalg::{inner_unchecked, SymmetricMatrix};
use crate::metrics::{ari, complete_signed_matrix, cut_value, maxcut_rstar_bound, signed_error_rate, sync_mse};
use crate::models::{
    apply_mask, elliptope_atoms, erdos_renyi, gen_bipartite_perturbed, gen_ssbm, gen_sync, CommunityAssignment,
    GroundTruth, NoiseModel, SsbmParams, SyncParams,
};
use crate::rng::derive_seed;
use crate::rounding::{angles, extract_phases, gw_round, spectral_sync};
use crate::signed::SignedAlgorithm;
use crate::solvers::{bm_solve, pierra_signed, pierra_solve, BmConfig, PierraConfig, Sense, SolveReport};

pub const SCHEMA_VERSION: u32 = 1;

fn default_replicates() -> usize {
    20
}

/// A sweep description, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Output prefix; defaults to `results/<experiment id>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Restores full-scale problem sizes.
    #[serde(default)]
    pub full: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum Experiment {
    SignedBeforeAfter(SignedBeforeAfter),
    MaxcutBipartiteHeatmap(BipartiteHeatmap),
    MaxcutGsetSweep(GsetSweep),
    SyncHeatmapGaussian(SyncGaussian),
    SyncHeatmapOutlier(SyncOutlier),
    FixedPointCurve(FixedPointCurve),
}

impl Experiment {
    pub fn id(&self) -> &'static str {
        match self {
            Self::SignedBeforeAfter(_) => "signed_before_after",
            Self::MaxcutBipartiteHeatmap(_) => "maxcut_bipartite_heatmap",
            Self::MaxcutGsetSweep(_) => "maxcut_gset_sweep",
            Self::SyncHeatmapGaussian(_) => "sync_heatmap_gaussian",
            Self::SyncHeatmapOutlier(_) => "sync_heatmap_outlier",
            Self::FixedPointCurve(_) => "fixed_point_curve",
        }
    }
}

/// Full-scale node count for the synthetic families.
const FULL_N: usize = 500;
/// Full-scale size of a synthetic Gset stand-in.
const FULL_GSET_N: usize = 1000;

fn loose_pierra() -> PierraConfig {
    PierraConfig { feas_tol: 1e-3, obj_tol: 1e-5, max_iters: 300, ..Default::default() }
}

fn single_restart_bm() -> BmConfig {
    BmConfig { restarts: 1, ..Default::default() }
}

/// Signed clustering error before and after the SDP, for every baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SignedBeforeAfter {
    pub n: usize,
    pub k: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub delta: Vec<f64>,
    pub solver: PierraConfig,
}

impl Default for SignedBeforeAfter {
    fn default() -> Self {
        Self { n: 200, k: 5, p: vec![0.8], q: vec![0.2], delta: vec![0.3], solver: loose_pierra() }
    }
}

/// ARI of the MAX-CUT partition against the planted bipartition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BipartiteHeatmap {
    pub n: usize,
    pub eta: Vec<f64>,
    pub delta: Vec<f64>,
    pub solver: BmConfig,
    pub gw_samples: usize,
}

impl Default for BipartiteHeatmap {
    fn default() -> Self {
        Self {
            n: 100,
            eta: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            delta: vec![0.1, 0.3, 0.5, 0.7, 1.0],
            solver: single_restart_bm(),
            gw_samples: 100,
        }
    }
}

/// Cut on the full graph from partitions computed on masked copies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GsetSweep {
    /// Gset-format file; a random graph of the same density is used if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
    /// Restrict to the subgraph induced by the first `nodes` nodes
    /// (size of the synthetic graph when `graph` is absent).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    pub synthetic_degree: f64,
    pub delta: Vec<f64>,
    pub solver: BmConfig,
    pub gw_samples: usize,
}

impl Default for GsetSweep {
    fn default() -> Self {
        Self {
            graph: None,
            nodes: Some(200),
            synthetic_degree: 12.0,
            delta: vec![0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0],
            // Sparse graphs have flat optima; a looser gradient test keeps
            // the sweep affordable without changing the rounded cuts.
            solver: BmConfig { grad_tol: 1e-4, ..single_restart_bm() },
            gw_samples: 100,
        }
    }
}

/// Synchronization MSE under Gaussian offsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyncGaussian {
    pub n: usize,
    pub sigma: Vec<f64>,
    pub sample_prob: Vec<f64>,
    pub solver: BmConfig,
}

impl Default for SyncGaussian {
    fn default() -> Self {
        Self {
            n: 200,
            sigma: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            sample_prob: vec![0.2, 0.5, 1.0],
            solver: single_restart_bm(),
        }
    }
}

/// Synchronization MSE under outlier offsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyncOutlier {
    pub n: usize,
    pub gamma: Vec<f64>,
    /// Gaussian noise level applied to the non-outlier offsets.
    pub sigma: f64,
    pub sample_prob: Vec<f64>,
    pub solver: BmConfig,
}

impl Default for SyncOutlier {
    fn default() -> Self {
        Self {
            n: 200,
            gamma: vec![0.0, 0.2, 0.4, 0.6, 0.8],
            sigma: 0.0,
            sample_prob: vec![0.2, 0.5, 1.0],
            solver: single_restart_bm(),
        }
    }
}

/// Localized suprema and `r̂` for masked MAX-CUT on a fixed random graph;
/// `replicates` is the number of Monte Carlo draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixedPointCurve {
    pub n: usize,
    /// Edge probability of the underlying Erdős–Rényi graph.
    pub graph_prob: f64,
    pub mask_prob: Vec<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub r_points: usize,
    /// Deviation level; `4^{-n}` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_prob: Option<f64>,
    pub localization: Localization,
    pub solver: PierraConfig,
}

impl Default for FixedPointCurve {
    fn default() -> Self {
        Self {
            n: 20,
            graph_prob: 0.5,
            mask_prob: vec![0.8],
            r_min: 16.0,
            r_max: 256.0,
            r_points: 9,
            delta_prob: None,
            localization: Localization::ExcessRisk,
            solver: FixedPointConfig::default_solver(),
        }
    }
}

fn check_grid(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(format!("grid {name} must be non-empty and finite")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self { schema_version: SCHEMA_VERSION, experiment, replicates: default_replicates(), seed: 0, output: None, full: false }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.replicates == 0 {
            return Err(invalid("replicates must be at least 1"));
        }
        match &self.experiment {
            Experiment::SignedBeforeAfter(e) => {
                check_grid("p", &e.p)?;
                check_grid("q", &e.q)?;
                check_grid("delta", &e.delta)?;
                e.solver.validate()
            }
            Experiment::MaxcutBipartiteHeatmap(e) => {
                check_grid("eta", &e.eta)?;
                check_grid("delta", &e.delta)?;
                positive("gw_samples", e.gw_samples)
            }
            Experiment::MaxcutGsetSweep(e) => {
                check_grid("delta", &e.delta)?;
                positive("gw_samples", e.gw_samples)
            }
            Experiment::SyncHeatmapGaussian(e) => {
                check_grid("sigma", &e.sigma)?;
                check_grid("sample_prob", &e.sample_prob)
            }
            Experiment::SyncHeatmapOutlier(e) => {
                check_grid("gamma", &e.gamma)?;
                check_grid("sample_prob", &e.sample_prob)
            }
            Experiment::FixedPointCurve(e) => {
                check_grid("mask_prob", &e.mask_prob)?;
                if !(e.r_min > 0.0 && e.r_max > e.r_min) || e.r_points < 2 {
                    return Err(invalid("radius grid needs 0 < r_min < r_max and at least two points"));
                }
                e.solver.validate()
            }
        }
    }

    /// The experiment with `full` applied.
    pub fn resolved(&self) -> Experiment {
        let mut e = self.experiment.clone();
        if self.full {
            match &mut e {
                Experiment::SignedBeforeAfter(x) => x.n = FULL_N,
                Experiment::MaxcutBipartiteHeatmap(x) => x.n = FULL_N,
                Experiment::SyncHeatmapGaussian(x) => x.n = FULL_N,
                Experiment::SyncHeatmapOutlier(x) => x.n = FULL_N,
                Experiment::MaxcutGsetSweep(x) => {
                    x.nodes = if x.graph.is_some() { None } else { Some(FULL_GSET_N) };
                }
                Experiment::FixedPointCurve(_) => {}
            }
        }
        e
    }

    pub fn output_prefix(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| Path::new("results").join(self.experiment.id()))
    }
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(invalid(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// A named grid dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &str, values: &[f64]) -> Self {
        Self { name: name.to_string(), values: values.to_vec() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    MaxIters,
    Error,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::MaxIters => "max_iters",
            Self::Error => "error",
        }
    }

    fn of(report: &SolveReport) -> Self {
        if report.converged() {
            Self::Ok
        } else {
            Self::MaxIters
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    /// Index along each axis.
    pub cell: Vec<usize>,
    pub replicate: usize,
    pub seed: u64,
    pub status: RowStatus,
    pub message: String,
    pub metrics: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation (zero for a single value).
    pub std: f64,
    pub count: usize,
}

/// Rows of a sweep, sorted by `(cell, replicate)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub axes: Vec<Axis>,
    pub metrics: Vec<String>,
    pub rows: Vec<ResultRow>,
}

/// Shortest round-trip representation, exponent form for small magnitudes.
fn fmt(v: f64) -> String {
    format!("{v:?}")
}

fn cells(axes: &[Axis]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..axis.values.len()).map(move |i| {
                    let mut c = prefix.clone();
                    c.push(i);
                    c
                })
            })
            .collect();
    }
    out
}

/// Outcome of one replicate: status and one value per metric.
pub type Outcome = Result<(RowStatus, Vec<Option<f64>>)>;

impl ResultTable {
    /// Runs `f(values, seed)` on every cell and replicate.
    pub fn sweep<F>(axes: Vec<Axis>, metrics: Vec<String>, replicates: usize, master: u64, f: F) -> Self
    where
        F: Fn(&[f64], u64) -> Outcome + Sync,
    {
        let tasks: Vec<(Vec<usize>, usize)> =
            cells(&axes).into_iter().flat_map(|c| (0..replicates).map(move |r| (c.clone(), r))).collect();
        let rows = tasks
            .into_par_iter()
            .map(|(cell, replicate)| {
                let mut path: Vec<u64> = cell.iter().map(|&i| i as u64).collect();
                path.push(replicate as u64);
                let seed = derive_seed(master, &path);
                let values: Vec<f64> = cell.iter().zip(&axes).map(|(&i, a)| a.values[i]).collect();
                let (status, message, m) = match f(&values, seed) {
                    Ok((status, m)) => {
                        assert_eq!(m.len(), metrics.len(), "metric count");
                        (status, String::new(), m)
                    }
                    Err(e) => (RowStatus::Error, e.to_string(), vec![None; metrics.len()]),
                };
                ResultRow { cell, replicate, seed, status, message, metrics: m }
            })
            .collect();
        Self { axes, metrics, rows }
    }

    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.metrics.iter().position(|m| m == name)
    }

    /// Finite values of `metric` in `cell`, in replicate order.
    pub fn values(&self, cell: &[usize], metric: &str) -> Vec<f64> {
        let Some(k) = self.metric_index(metric) else { return vec![] };
        self.rows.iter().filter(|r| r.cell == cell).filter_map(|r| r.metrics[k]).filter(|v| v.is_finite()).collect()
    }

    pub fn cells(&self) -> Vec<Vec<usize>> {
        cells(&self.axes)
    }

    pub fn summarize(&self, cell: &[usize]) -> Vec<Option<MetricSummary>> {
        self.metrics
            .iter()
            .map(|m| {
                let v = self.values(cell, m);
                if v.is_empty() {
                    return None;
                }
                let count = v.len();
                let mean = v.iter().sum::<f64>() / count as f64;
                let std = if count > 1 {
                    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
                } else {
                    0.0
                };
                Some(MetricSummary { mean, std, count })
            })
            .collect()
    }

    fn cell_index(&self, cell: &[usize]) -> usize {
        cell.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.values.len() + i)
    }

    fn axis_values(&self, cell: &[usize]) -> Vec<String> {
        cell.iter().zip(&self.axes).map(|(&i, a)| fmt(a.values[i])).collect()
    }

    pub fn rows_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        let mut header = vec!["cell".to_string()];
        header.extend(self.axes.iter().map(|a| a.name.clone()));
        header.extend(["replicate", "seed", "status", "message"].map(String::from));
        header.extend(self.metrics.iter().cloned());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![self.cell_index(&r.cell).to_string()];
            rec.extend(self.axis_values(&r.cell));
            rec.extend([r.replicate.to_string(), r.seed.to_string(), r.status.as_str().into(), r.message.clone()]);
            rec.extend(r.metrics.iter().map(|m| m.map(fmt).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        finish(w)
    }

    pub fn summary_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        let mut header = vec!["cell".to_string()];
        header.extend(self.axes.iter().map(|a| a.name.clone()));
        for m in &self.metrics {
            header.extend([format!("{m}_mean"), format!("{m}_std"), format!("{m}_count")]);
        }
        w.write_record(&header)?;
        for cell in self.cells() {
            let mut rec = vec![self.cell_index(&cell).to_string()];
            rec.extend(self.axis_values(&cell));
            for s in self.summarize(&cell) {
                match s {
                    Some(s) => rec.extend([fmt(s.mean), fmt(s.std), s.count.to_string()]),
                    None => rec.extend([String::new(), String::new(), "0".into()]),
                }
            }
            w.write_record(&rec)?;
        }
        finish(w)
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| invalid(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Results of a sweep before they are written.
#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub table: ResultTable,
    /// Experiment-specific summary stored in the sidecar.
    pub extra: Value,
    /// Additional CSV files, keyed by suffix (e.g. `.curve.csv`).
    pub attachments: Vec<(String, String)>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub result: ExperimentResult,
    pub files: Vec<PathBuf>,
}

/// Runs the sweep without touching the file system.
pub fn compute_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let reps = config.replicates;
    let seed = config.seed;
    let plain = |table| ExperimentResult { table, extra: Value::Null, attachments: vec![] };
    Ok(match config.resolved() {
        Experiment::SignedBeforeAfter(e) => plain(signed_before_after(&e, reps, seed)),
        Experiment::MaxcutBipartiteHeatmap(e) => plain(bipartite_heatmap(&e, reps, seed)),
        Experiment::MaxcutGsetSweep(e) => {
            let graph = load_or_synthesize(&e, seed)?;
            let extra = json!({ "n": graph.n, "m": graph.m(), "total_weight": graph.total_weight() });
            let table = gset_sweep(&graph, &e.delta, reps, seed, &e.solver, e.gw_samples)?;
            ExperimentResult { table, extra, attachments: vec![] }
        }
        Experiment::SyncHeatmapGaussian(e) => plain(sync_gaussian(&e, reps, seed)),
        Experiment::SyncHeatmapOutlier(e) => plain(sync_outlier(&e, reps, seed)),
        Experiment::FixedPointCurve(e) => fixed_point_curve(&e, reps, seed)?,
    })
}

/// Runs the sweep and writes the rows, summary and sidecar files.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let result = compute_experiment(config)?;
    let prefix = config.output_prefix();
    let mut files = vec![with_suffix(&prefix, ".rows.csv"), with_suffix(&prefix, ".summary.csv")];
    write_text(&files[0], &result.table.rows_csv()?)?;
    write_text(&files[1], &result.table.summary_csv()?)?;
    for (suffix, text) in &result.attachments {
        let p = with_suffix(&prefix, suffix);
        write_text(&p, text)?;
        files.push(p);
    }
    let mut echo = config.clone();
    echo.output = None;
    let name = |p: &Path| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let sidecar = json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": config.experiment.id(),
        "master_seed": config.seed,
        "replicates": config.replicates,
        "config": echo,
        "resolved": config.resolved(),
        "axes": result.table.axes,
        "metrics": result.table.metrics,
        "files": files.iter().map(|p| name(p)).collect::<Vec<_>>(),
        "extra": result.extra,
    });
    let p = with_suffix(&prefix, ".json");
    write_json(&p, &sidecar)?;
    files.push(p);
    Ok(ExperimentOutput { result, files })
}

fn labels_of(truth: &GroundTruth) -> Result<&CommunityAssignment> {
    match truth {
        GroundTruth::Labels(a) => Ok(a),
        _ => Err(invalid("instance carries no community labels")),
    }
}

/// Metric names `<algo>_before`, `<algo>_after`, `<algo>_delta` per baseline,
/// followed by solver diagnostics.
pub fn signed_metric_names() -> Vec<String> {
    let mut names = vec![];
    for a in SignedAlgorithm::ALL {
        for s in ["before", "after", "delta"] {
            names.push(format!("{}_{s}", a.name()));
        }
    }
    names.extend(["sdp_iterations".into(), "sdp_residual".into()]);
    names
}

fn signed_before_after(e: &SignedBeforeAfter, reps: usize, master: u64) -> ResultTable {
    let axes = vec![Axis::new("p", &e.p), Axis::new("q", &e.q), Axis::new("delta", &e.delta)];
    ResultTable::sweep(axes, signed_metric_names(), reps, master, |v, seed| {
        let params = SsbmParams { n: e.n, k: e.k, p: v[0], q: v[1], delta: v[2], sizes: None };
        let inst = gen_ssbm(&params, seed)?;
        let truth = labels_of(&inst.truth)?;
        let a_com = complete_signed_matrix(truth);
        let (z, report) = pierra_signed(&inst.observed, params.alpha(), &e.solver)?;
        let cluster_seed = derive_seed(seed, &[1]);
        let mut m = vec![];
        for algo in SignedAlgorithm::ALL {
            let before = signed_error_rate(&algo.cluster(&inst.observed, e.k, cluster_seed)?, &a_com)?;
            let after = signed_error_rate(&algo.cluster(&z, e.k, cluster_seed)?, &a_com)?;
            m.extend([Some(before), Some(after), Some(before - after)]);
        }
        m.extend([Some(report.iterations as f64), Some(report.max_residual())]);
        Ok((RowStatus::of(&report), m))
    })
}

/// `¼⟨A⁰, J − Ẑ⟩`.
fn sdp_cut_value(a0: &SymmetricMatrix, z: &SymmetricMatrix) -> f64 {
    0.25 * (a0.entry_sum() - inner_unchecked(a0, z))
}

fn bipartite_heatmap(e: &BipartiteHeatmap, reps: usize, master: u64) -> ResultTable {
    let axes = vec![Axis::new("eta", &e.eta), Axis::new("delta", &e.delta)];
    let metrics = ["ari", "cut", "planted_cut", "sdp_value", "iterations"].map(String::from).to_vec();
    ResultTable::sweep(axes, metrics, reps, master, |v, seed| {
        let inst = gen_bipartite_perturbed(e.n, v[0], v[1], seed)?;
        let bm = BmConfig { seed: derive_seed(seed, &[1]), ..e.solver.clone() };
        let sol = bm_solve(&inst.rescaled, Sense::Max, &bm)?;
        let gw = gw_round(&sol.z, &inst.full, e.gw_samples, derive_seed(seed, &[2]))?;
        let planted = inst.partition.as_ref().ok_or_else(|| invalid("missing planted partition"))?;
        let score = ari(
            &CommunityAssignment::from_raw(&gw.best.as_labels())?,
            &CommunityAssignment::from_raw(&planted.as_labels())?,
        )?;
        let m = vec![
            Some(score),
            Some(gw.best_value),
            Some(cut_value(&inst.full, planted)?),
            Some(sdp_cut_value(&inst.full, &sol.z)),
            Some(sol.report.iterations as f64),
        ];
        Ok((RowStatus::of(&sol.report), m))
    })
}

fn load_or_synthesize(e: &GsetSweep, master: u64) -> Result<GsetGraph> {
    match &e.graph {
        Some(path) => {
            let g = parse_gset(&std::fs::read_to_string(path)?)?;
            match e.nodes {
                Some(k) if k < g.n => g.subgraph(k),
                _ => Ok(g),
            }
        }
        None => GsetGraph::random(e.nodes.unwrap_or(FULL_GSET_N), e.synthetic_degree, derive_seed(master, &[u64::MAX])),
    }
}

/// For each mask probability `δ`: mask the graph, solve the MAX-CUT SDP on
/// the masked graph, round, and evaluate the cut on the full graph.
pub fn gset_sweep(
    graph: &GsetGraph,
    delta_grid: &[f64],
    replicates: usize,
    seed: u64,
    solver: &BmConfig,
    gw_samples: usize,
) -> Result<ResultTable> {
    check_grid("delta", delta_grid)?;
    positive("replicates", replicates)?;
    positive("gw_samples", gw_samples)?;
    let a0 = graph.adjacency();
    let half_weight = 0.5 * graph.total_weight();
    let metrics = ["cut", "gw_mean", "random_cut", "sdp_value", "iterations"].map(String::from).to_vec();
    Ok(ResultTable::sweep(vec![Axis::new("delta", delta_grid)], metrics, replicates, seed, |v, seed| {
        let inst = apply_mask(&a0, v[0], seed)?;
        let bm = BmConfig { seed: derive_seed(seed, &[1]), ..solver.clone() };
        let sol = bm_solve(&inst.rescaled, Sense::Max, &bm)?;
        let gw = gw_round(&sol.z, &a0, gw_samples, derive_seed(seed, &[2]))?;
        let m = vec![
            Some(gw.best_value),
            Some(gw.mean),
            Some(half_weight),
            Some(sdp_cut_value(&a0, &sol.z)),
            Some(sol.report.iterations as f64),
        ];
        Ok((RowStatus::of(&sol.report), m))
    }))
}

const SYNC_METRICS: [&str; 3] = ["mse_sdp", "mse_spectral", "iterations"];

fn sync_row(params: &SyncParams, solver: &BmConfig, seed: u64) -> Outcome {
    let inst = gen_sync(params, seed)?;
    let truth = match &inst.truth {
        GroundTruth::Phases(p) => p.clone(),
        _ => return Err(invalid("instance carries no phases")),
    };
    let bm = BmConfig { seed: derive_seed(seed, &[1]), ..solver.clone() };
    let sol = bm_solve(&inst.observed, Sense::Max, &bm)?;
    let sdp = sync_mse(&angles(&extract_phases(&sol.z)?), &truth)?;
    let spectral = sync_mse(&angles(&spectral_sync(&inst.observed)?), &truth)?;
    Ok((RowStatus::of(&sol.report), vec![Some(sdp), Some(spectral), Some(sol.report.iterations as f64)]))
}

fn sync_gaussian(e: &SyncGaussian, reps: usize, master: u64) -> ResultTable {
    let axes = vec![Axis::new("sigma", &e.sigma), Axis::new("sample_prob", &e.sample_prob)];
    ResultTable::sweep(axes, SYNC_METRICS.map(String::from).to_vec(), reps, master, |v, seed| {
        let params = SyncParams { n: e.n, sigma: v[0], noise: NoiseModel::Gaussian, sample_prob: v[1], phases: None };
        sync_row(&params, &e.solver, seed)
    })
}

fn sync_outlier(e: &SyncOutlier, reps: usize, master: u64) -> ResultTable {
    let axes = vec![Axis::new("gamma", &e.gamma), Axis::new("sample_prob", &e.sample_prob)];
    ResultTable::sweep(axes, SYNC_METRICS.map(String::from).to_vec(), reps, master, |v, seed| {
        let params =
            SyncParams { n: e.n, sigma: e.sigma, noise: NoiseModel::Outlier { gamma: v[0] }, sample_prob: v[1], phases: None };
        sync_row(&params, &e.solver, seed)
    })
}

/// Tolerances for the MAX-CUT oracle `argmax ⟨−A⁰, Z⟩`, which has no closed form.
fn oracle_solver() -> PierraConfig {
    PierraConfig { feas_tol: 1e-9, obj_tol: 1e-12, max_iters: 200_000, ..Default::default() }
}

/// Fixed-point setup for masked MAX-CUT on `a0`: replicates are fresh masks,
/// the oracle is solved numerically once.
pub fn maxcut_replicates(
    a0: &SymmetricMatrix,
    mask_prob: f64,
) -> Result<impl Fn(u64) -> Result<Replicate<f64>> + Sync + '_> {
    let expected = a0.scale(-1.0);
    let (oracle, report) = pierra_solve(&expected, &elliptope_atoms(), &oracle_solver())?;
    if !report.converged() {
        return Err(crate::Error::NotConverged(format!(
            "MAX-CUT oracle stopped at residual {:e}",
            report.max_residual()
        )));
    }
    Ok(move |seed: u64| {
        let inst = apply_mask(a0, mask_prob, seed)?;
        Ok(Replicate { observed: inst.rescaled, expected: expected.clone(), oracle: oracle.clone() })
    })
}

/// `4^{-n}`.
pub fn maxcut_delta(n: usize) -> f64 {
    0.25f64.powi(n as i32)
}

fn fixed_point_curve(e: &FixedPointCurve, reps: usize, master: u64) -> Result<ExperimentResult> {
    let a0 = erdos_renyi(e.n, e.graph_prob, derive_seed(master, &[u64::MAX]))?;
    let grid = geometric_grid(e.r_min, e.r_max, e.r_points);
    let delta_prob = e.delta_prob.unwrap_or_else(|| maxcut_delta(e.n));
    let mut estimates: Vec<(f64, FixedPointEstimate, f64)> = vec![];
    let mut rows = vec![];
    for (ip, &p) in e.mask_prob.iter().enumerate() {
        let cfg = FixedPointConfig {
            delta_prob,
            n_mc: reps,
            r_grid: grid.clone(),
            localization: e.localization,
            seed: derive_seed(master, &[ip as u64]),
            solver: e.solver.clone(),
        };
        let (curves, est) = match maxcut_replicates(&a0, p)
            .and_then(|g| replicate_curves(&g, &elliptope_atoms(), &cfg))
            .and_then(|c| summarize_curves(&c, &cfg).map(|est| (c, est)))
        {
            Ok(x) => x,
            Err(err) => {
                for (ir, rep) in (0..grid.len()).flat_map(|ir| (0..reps).map(move |r| (ir, r))) {
                    rows.push(ResultRow {
                        cell: vec![ip, ir],
                        replicate: rep,
                        seed: derive_seed(cfg.seed, &[rep as u64]),
                        status: RowStatus::Error,
                        message: err.to_string(),
                        metrics: vec![None],
                    });
                }
                continue;
            }
        };
        for ir in 0..grid.len() {
            for (rep, c) in curves.iter().enumerate() {
                let (status, value) = match c {
                    Some(v) => (RowStatus::Ok, Some(v[ir])),
                    None => (RowStatus::MaxIters, None),
                };
                let seed = derive_seed(cfg.seed, &[rep as u64]);
                rows.push(ResultRow { cell: vec![ip, ir], replicate: rep, seed, status, message: String::new(), metrics: vec![value] });
            }
        }
        estimates.push((p, est, maxcut_rstar_bound(e.n, p)?.value));
    }
    let table = ResultTable {
        axes: vec![Axis::new("mask_prob", &e.mask_prob), Axis::new("r", &grid)],
        metrics: vec!["sup".into()],
        rows,
    };
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["mask_prob", "r", "quantile", "n_effective", "bound"])?;
    for (p, est, bound) in &estimates {
        for q in &est.quantile_curve {
            w.write_record([fmt(*p), fmt(q.r), fmt(q.quantile), q.n_effective.to_string(), fmt(*bound)])?;
        }
    }
    let curve = finish(w)?;
    let extra = json!({
        "delta_prob": delta_prob,
        "estimates": estimates.iter().map(|(p, est, bound)| json!({
            "mask_prob": p, "estimate": est, "bound": bound, "within_bound": est.r_hat <= *bound,
        })).collect::<Vec<_>>(),
    });
    Ok(ExperimentResult { table, extra, attachments: vec![(".curve.csv".into(), curve)] })
}
