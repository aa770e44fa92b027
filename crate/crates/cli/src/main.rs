//! `graphsdp`: generate instances, solve the SDP relaxations, round,
//! cluster, evaluate, estimate fixed points and run experiment sweeps.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver non-convergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use graphsdp::experiments::{maxcut_delta, maxcut_replicates, run_experiment, ExperimentConfig};
use graphsdp::fixed_point::{estimate_fixed_point, geometric_grid, FixedPointConfig, Localization, Replicate};
use graphsdp::gset::{parse_gset, GsetGraph};
use graphsdp::io::{load_instance, load_meta, load_solution, read_json, save_instance, save_solution, write_json, write_text};
use graphsdp::metrics::{ari, complete_signed_matrix, cut_value, excess_risk, signed_error_rate, sync_mse};
use graphsdp::models::{
    apply_mask, erdos_renyi, gen_bipartite_perturbed, gen_sbm, gen_ssbm, gen_sync, CommunityAssignment, CutVector,
    GroundTruth, NoiseModel, ProblemInstance, ProblemKind, SbmParams, SsbmParams, SyncParams,
};
use graphsdp::rounding::{angles, extract_communities, extract_phases, gw_round};
use graphsdp::signed::SignedAlgorithm;
use graphsdp::solvers::{bm_solve, max_residual, pierra_solve, BmConfig, PierraConfig, Sense, SolveReport};
use graphsdp::{Error, Scalar, SelfAdjoint};

const EXIT_INVALID: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "graphsdp", version, about = "SDP estimators for graph learning problems")]
struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path or prefix; commands print to stdout when it is omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw an instance and save it with its expectation, oracle and truth.
    Generate(GenerateArgs),
    /// Solve the SDP relaxation of a saved instance.
    Solve(SolveArgs),
    /// Turn a solution into a cut, assignment or phases.
    Round(RoundArgs),
    /// Run a signed clustering baseline on the data or on an SDP solution.
    Cluster(ClusterArgs),
    /// Score estimates against the ground truth of an instance.
    Evaluate(EvaluateArgs),
    /// Monte Carlo estimate of the localized fixed point, as CSV.
    FixedPoint(FixedPointArgs),
    /// Run an experiment sweep described by a JSON config.
    Experiment(ExperimentArgs),
    /// Gset graph utilities.
    Gset {
        #[command(subcommand)]
        action: GsetAction,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Problem {
    Community,
    Signed,
    Sync,
    Maxcut,
}

impl Problem {
    fn kind(self) -> ProblemKind {
        match self {
            Self::Community => ProblemKind::Community,
            Self::Signed => ProblemKind::Signed,
            Self::Sync => ProblemKind::Sync,
            Self::Maxcut => ProblemKind::Maxcut,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    Gaussian,
    Outlier,
}

/// Generator parameters; unset values take problem-specific defaults.
#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Number of communities.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Within-community edge (community) or positive-sign (signed) probability.
    #[arg(long)]
    p: Option<f64>,
    /// Across-community counterpart of `p`.
    #[arg(long)]
    q: Option<f64>,
    /// Edge sampling (signed) or mask (bipartite MAX-CUT) probability.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = Noise::Gaussian)]
    noise: Noise,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    sample_prob: f64,
    /// Within-half edge probability of the perturbed bipartite graph.
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// Gset file to mask instead of the bipartite model.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Edge probability of a random base graph (fixed-point MAX-CUT).
    #[arg(long, default_value_t = 0.5)]
    graph_prob: f64,
    /// Mask probability applied to `--graph` or the random base graph.
    #[arg(long, default_value_t = 0.8)]
    mask_prob: f64,
}

impl ModelArgs {
    fn sbm(&self) -> SbmParams {
        SbmParams { n: self.n, k: self.k, p: self.p.unwrap_or(0.5), q: self.q.unwrap_or(0.1), sizes: None }
    }

    fn ssbm(&self) -> SsbmParams {
        SsbmParams {
            n: self.n,
            k: self.k,
            p: self.p.unwrap_or(0.9),
            q: self.q.unwrap_or(0.1),
            delta: self.delta.unwrap_or(0.8),
            sizes: None,
        }
    }

    fn sync(&self) -> SyncParams {
        let noise = match self.noise {
            Noise::Gaussian => NoiseModel::Gaussian,
            Noise::Outlier => NoiseModel::Outlier { gamma: self.gamma },
        };
        SyncParams { n: self.n, sigma: self.sigma, noise, sample_prob: self.sample_prob, phases: None }
    }

    fn gset(&self) -> anyhow::Result<Option<GsetGraph>> {
        let Some(path) = &self.graph else { return Ok(None) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(Some(parse_gset(&text).with_context(|| format!("parsing {}", path.display()))?))
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverChoice {
    Pierra,
    Bm,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    #[arg(long, value_enum, default_value_t = SolverChoice::Pierra)]
    solver: SolverChoice,
    /// JSON solver settings: `{"schema_version": 1, "pierra": {...}, "bm": {...}}`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Instance prefix.
    #[arg(long = "in")]
    input: PathBuf,
}

/// Solver settings file.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default)]
struct SolveConfig {
    schema_version: Option<u32>,
    pierra: PierraConfig,
    bm: BmConfig,
}

#[derive(Args)]
struct RoundArgs {
    /// Instance prefix.
    #[arg(long = "in")]
    input: PathBuf,
    /// Solution prefix.
    #[arg(long)]
    solution: PathBuf,
    /// Hyperplane samples for MAX-CUT.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Number of communities (defaults to the ground truth's).
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClusterInput {
    Raw,
    Sdp,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long, value_enum, default_value_t = ClusterInput::Raw)]
    input: ClusterInput,
    /// adjacency, lbar, lbar_rw, lbar_sym or bnc.
    #[arg(long, default_value = "adjacency")]
    algorithm: String,
    #[arg(long)]
    k: Option<usize>,
    /// Instance prefix.
    #[arg(long = "in")]
    instance: PathBuf,
    /// Solution prefix, required with `--input sdp`.
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Instance prefix.
    #[arg(long = "in")]
    instance: PathBuf,
    /// Output of `round` or `cluster`.
    #[arg(long)]
    estimate: Option<PathBuf>,
    /// Solution prefix.
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LocalizationArg {
    ExcessRisk,
    L1,
    L2,
}

#[derive(Args)]
struct FixedPointArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 200)]
    n_mc: usize,
    /// Explicit comma-separated radii; otherwise a geometric grid.
    #[arg(long, value_delimiter = ',')]
    r_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 16.0)]
    r_min: f64,
    #[arg(long, default_value_t = 256.0)]
    r_max: f64,
    #[arg(long, default_value_t = 9)]
    r_points: usize,
    /// Deviation level; `4^{-n}` for MAX-CUT and 0.05 otherwise.
    #[arg(long)]
    delta_prob: Option<f64>,
    #[arg(long, value_enum, default_value_t = LocalizationArg::ExcessRisk)]
    localization: LocalizationArg,
    #[arg(long, default_value_t = 1e-6)]
    feas_tol: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Full-scale problem sizes.
    #[arg(long)]
    full: bool,
    /// Override the replicate count of the config.
    #[arg(long)]
    replicates: Option<usize>,
}

#[derive(Subcommand)]
enum GsetAction {
    /// Print node, edge and weight statistics.
    Info {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Write a random unit-weight graph in Gset format.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 12.0)]
        degree: f64,
    },
    /// Mask, solve, round and score on the full graph for each mask level.
    Sweep {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.5,0.7,0.9,1.0")]
        delta: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        replicates: usize,
        /// Restrict to the first `nodes` nodes.
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

/// Writes `text` to `--out` or stdout.
fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => write_text(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, value: &Value) -> anyhow::Result<()> {
    match out {
        Some(p) => write_json(p, value)?,
        None => println!("{}", serde_json::to_string_pretty(value)?),
    }
    Ok(())
}

fn require_out(out: Option<&Path>) -> anyhow::Result<&Path> {
    out.ok_or_else(|| Error::InvalidInput("--out is required for this command".into()).into())
}

fn generate(args: &GenerateArgs, seed: u64, out: &Path) -> anyhow::Result<()> {
    let m = &args.model;
    let files = match args.problem {
        Problem::Community => save_instance(&gen_sbm(&m.sbm(), seed)?, out)?,
        Problem::Signed => save_instance(&gen_ssbm(&m.ssbm(), seed)?, out)?,
        Problem::Sync => save_instance(&gen_sync(&m.sync(), seed)?, out)?,
        Problem::Maxcut => {
            let inst = match m.gset()? {
                Some(g) => apply_mask(&g.adjacency(), m.mask_prob, seed)?,
                None => gen_bipartite_perturbed(m.n, m.eta, m.delta.unwrap_or(1.0), seed)?,
            };
            save_instance(&inst.to_problem(), out)?
        }
    };
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn solve_instance<T: Scalar>(
    inst: &ProblemInstance<T>,
    solver: SolverChoice,
    cfg: &SolveConfig,
) -> graphsdp::Result<(SelfAdjoint<T>, SolveReport)> {
    match solver {
        SolverChoice::Pierra => pierra_solve(&inst.objective(), &inst.atoms(), &cfg.pierra),
        SolverChoice::Bm => {
            if !matches!(inst.kind, ProblemKind::Sync | ProblemKind::Maxcut) {
                return Err(Error::Unsupported("the Burer–Monteiro solver handles {Z ⪰ 0, diag(Z) = 1} only".into()));
            }
            let sol = bm_solve(&inst.objective(), Sense::Max, &cfg.bm)?;
            Ok((sol.z, sol.report))
        }
    }
}

fn solve(args: &SolveArgs, seed: Option<u64>, out: &Path) -> anyhow::Result<()> {
    let mut cfg: SolveConfig = match &args.config {
        Some(p) => read_json(p).with_context(|| format!("reading {}", p.display()))?,
        None => SolveConfig::default(),
    };
    if let Some(v) = cfg.schema_version.filter(|&v| v != 1) {
        bail!(Error::InvalidInput(format!("unsupported schema_version {v}")));
    }
    if let Some(s) = seed {
        cfg.bm.seed = s;
    }
    let meta = load_meta(&args.input)?;
    if meta.kind != args.problem.kind() {
        bail!(Error::InvalidInput(format!("instance holds a {:?} problem", meta.kind)));
    }
    let report = if meta.complex {
        let inst: ProblemInstance<Complex64> = load_instance(&args.input)?;
        let (z, report) = solve_instance(&inst, args.solver, &cfg)?;
        save_solution(&z, &report, out)?;
        report
    } else {
        let inst: ProblemInstance<f64> = load_instance(&args.input)?;
        let (z, report) = solve_instance(&inst, args.solver, &cfg)?;
        save_solution(&z, &report, out)?;
        report
    };
    println!(
        "{}: {} iterations, objective {:e}, max residual {:e}",
        report.solver,
        report.iterations,
        report.objective,
        report.max_residual()
    );
    if !report.converged() {
        bail!(Error::NotConverged(format!("stopped after {} iterations", report.iterations)));
    }
    Ok(())
}

fn truth_k(truth: &GroundTruth) -> Option<usize> {
    match truth {
        GroundTruth::Labels(a) => Some(a.k()),
        _ => None,
    }
}

fn round(args: &RoundArgs, seed: u64, out: Option<&Path>) -> anyhow::Result<()> {
    let meta = load_meta(&args.input)?;
    let value = match meta.kind {
        ProblemKind::Sync => {
            let (z, _) = load_solution::<Complex64>(&args.solution)?;
            json!({ "phases": angles(&extract_phases(&z)?) })
        }
        ProblemKind::Maxcut => {
            let inst: ProblemInstance<f64> = load_instance(&args.input)?;
            let (z, _) = load_solution::<f64>(&args.solution)?;
            // E[B] = −A⁰, so the full graph is recoverable from the instance.
            let full = inst.expected.scale(-1.0);
            let gw = gw_round(&z, &full, args.samples, seed)?;
            json!({ "cut": gw.best, "cut_value": gw.best_value, "gw_mean": gw.mean, "gw_std": gw.std, "samples": gw.n_samples })
        }
        ProblemKind::Community | ProblemKind::Signed => {
            let (z, _) = load_solution::<f64>(&args.solution)?;
            let k = args.k.or(truth_k(&meta.truth)).ok_or_else(|| anyhow!(Error::InvalidInput("--k is required".into())))?;
            json!({ "assignment": extract_communities(&z, k, seed)? })
        }
    };
    emit_json(out, &value)
}

fn cluster(args: &ClusterArgs, seed: u64, out: Option<&Path>) -> anyhow::Result<()> {
    let algo: SignedAlgorithm = args.algorithm.parse()?;
    let inst: ProblemInstance<f64> = load_instance(&args.instance)?;
    let k = args.k.or(truth_k(&inst.truth)).ok_or_else(|| anyhow!(Error::InvalidInput("--k is required".into())))?;
    let input = match args.input {
        ClusterInput::Raw => inst.observed,
        ClusterInput::Sdp => {
            let p = args
                .solution
                .as_ref()
                .ok_or_else(|| anyhow!(Error::InvalidInput("--solution is required with --input sdp".into())))?;
            load_solution::<f64>(p)?.0
        }
    };
    emit_json(out, &json!({ "algorithm": algo.name(), "assignment": algo.cluster(&input, k, seed)? }))
}

fn evaluate_solution<T: Scalar>(inst: &ProblemInstance<T>, z: &SelfAdjoint<T>, report: &SolveReport) -> graphsdp::Result<Value> {
    let mut v = json!({
        "objective": graphsdp::linalg::frobenius_inner(&inst.objective(), z)?,
        "max_residual": max_residual(&inst.atoms(), z)?,
        "converged": report.converged(),
    });
    if let Some(oracle) = &inst.oracle {
        v["excess_risk"] = json!(excess_risk(&inst.expected_objective(), oracle, z)?);
        v["distance_to_oracle"] = json!(oracle.add_scaled(-1.0, z).max_abs());
    }
    Ok(v)
}

fn evaluate(args: &EvaluateArgs, out: Option<&Path>) -> anyhow::Result<()> {
    let meta = load_meta(&args.instance)?;
    let mut result = json!({ "problem": meta.kind });
    if let Some(p) = &args.solution {
        result["solution"] = if meta.complex {
            let inst: ProblemInstance<Complex64> = load_instance(&args.instance)?;
            let (z, report) = load_solution(p)?;
            evaluate_solution(&inst, &z, &report)?
        } else {
            let inst: ProblemInstance<f64> = load_instance(&args.instance)?;
            let (z, report) = load_solution(p)?;
            evaluate_solution(&inst, &z, &report)?
        };
    }
    if let Some(p) = &args.estimate {
        let est: Value = read_json(p).with_context(|| format!("reading {}", p.display()))?;
        let mut scores = serde_json::Map::new();
        if let Some(labels) = est.get("assignment") {
            let a: CommunityAssignment = serde_json::from_value(labels.clone())?;
            if let GroundTruth::Labels(truth) = &meta.truth {
                scores.insert("ari".into(), json!(ari(&a, truth)?));
                if meta.kind == ProblemKind::Signed {
                    scores.insert("error_rate".into(), json!(signed_error_rate(&a, &complete_signed_matrix(truth))?));
                }
            }
        } else if let Some(cut) = est.get("cut") {
            let x: CutVector = serde_json::from_value(cut.clone())?;
            let inst: ProblemInstance<f64> = load_instance(&args.instance)?;
            scores.insert("cut_full".into(), json!(cut_value(&inst.expected.scale(-1.0), &x)?));
            if let GroundTruth::Partition(truth) = &meta.truth {
                let a = CommunityAssignment::from_raw(&x.as_labels())?;
                let b = CommunityAssignment::from_raw(&truth.as_labels())?;
                scores.insert("ari".into(), json!(ari(&a, &b)?));
            }
        } else if let Some(ph) = est.get("phases") {
            let est: Vec<f64> = serde_json::from_value(ph.clone())?;
            if let GroundTruth::Phases(truth) = &meta.truth {
                scores.insert("mse".into(), json!(sync_mse(&est, truth)?));
            }
        } else {
            bail!(Error::InvalidInput("estimate holds no assignment, cut or phases".into()));
        }
        result["estimate"] = Value::Object(scores);
    }
    emit_json(out, &result)
}

fn from_instance<T: Scalar>(inst: graphsdp::Result<ProblemInstance<T>>) -> graphsdp::Result<Replicate<T>> {
    Replicate::from_instance(&inst?)
}

fn fixed_point(args: &FixedPointArgs, seed: u64, out: Option<&Path>) -> anyhow::Result<()> {
    let m = &args.model;
    let r_grid = match &args.r_grid {
        Some(g) => g.clone(),
        None => geometric_grid(args.r_min, args.r_max, args.r_points),
    };
    let default_delta = if args.problem == Problem::Maxcut { maxcut_delta(m.n) } else { 0.05 };
    let cfg = FixedPointConfig {
        delta_prob: args.delta_prob.unwrap_or(default_delta),
        n_mc: args.n_mc,
        r_grid,
        localization: match args.localization {
            LocalizationArg::ExcessRisk => Localization::ExcessRisk,
            LocalizationArg::L1 => Localization::L1,
            LocalizationArg::L2 => Localization::L2,
        },
        seed,
        solver: PierraConfig { feas_tol: args.feas_tol, ..FixedPointConfig::default_solver() },
    };
    let est = match args.problem {
        Problem::Community => {
            let p = m.sbm();
            let atoms = gen_sbm(&p, seed)?.atoms();
            estimate_fixed_point(&|s| from_instance(gen_sbm(&p, s)), &atoms, &cfg)?
        }
        Problem::Signed => {
            let p = m.ssbm();
            estimate_fixed_point(&|s| from_instance(gen_ssbm(&p, s)), &graphsdp::models::signed_atoms(), &cfg)?
        }
        Problem::Sync => {
            let p = m.sync();
            estimate_fixed_point(&|s| from_instance(gen_sync(&p, s)), &graphsdp::models::elliptope_atoms(), &cfg)?
        }
        Problem::Maxcut => {
            let a0 = match m.gset()? {
                Some(g) => g.adjacency(),
                None => erdos_renyi(m.n, m.graph_prob, seed)?,
            };
            let gen = maxcut_replicates(&a0, m.mask_prob)?;
            estimate_fixed_point(&gen, &graphsdp::models::elliptope_atoms(), &cfg)?
        }
    };
    let mut csv = String::from("r,quantile,n_effective\n");
    for p in &est.quantile_curve {
        csv.push_str(&format!("{:?},{:?},{}\n", p.r, p.quantile, p.n_effective));
    }
    emit(out, &csv)?;
    eprintln!(
        "r_hat = {:?} (delta = {:e}, {} of {} replicates flagged{}{})",
        est.r_hat,
        est.delta,
        est.flagged,
        est.n_mc,
        if est.unresolved { ", unresolved" } else { "" },
        if est.unreliable { ", unreliable" } else { "" }
    );
    Ok(())
}

fn experiment(args: &ExperimentArgs, seed: Option<u64>, out: Option<&Path>) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    cfg.full |= args.full;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if let Some(o) = out {
        cfg.output = Some(o.to_path_buf());
    }
    cfg.validate()?;
    let result = run_experiment(&cfg)?;
    for f in &result.files {
        println!("{}", f.display());
    }
    let failed = result.result.table.rows.iter().filter(|r| r.status == graphsdp::experiments::RowStatus::Error).count();
    if failed > 0 {
        eprintln!("{failed} rows failed; see the status and message columns");
    }
    Ok(())
}

fn gset(action: &GsetAction, seed: u64, out: Option<&Path>) -> anyhow::Result<()> {
    let load = |p: &Path| -> anyhow::Result<GsetGraph> {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        Ok(parse_gset(&text).with_context(|| format!("parsing {}", p.display()))?)
    };
    match action {
        GsetAction::Info { input } => {
            let g = load(input)?;
            let value = json!({
                "n": g.n,
                "m": g.m(),
                "total_weight": g.total_weight(),
                "average_degree": g.average_degree(),
                "negative_edges": g.edges.iter().filter(|e| e.2 < 0.0).count(),
            });
            emit_json(out, &value)
        }
        GsetAction::Synth { n, degree } => emit(out, &GsetGraph::random(*n, *degree, seed)?.render()),
        GsetAction::Sweep { input, delta, replicates, nodes, samples } => {
            let mut g = load(input)?;
            if let Some(k) = nodes.filter(|&k| k < g.n) {
                g = g.subgraph(k)?;
            }
            let solver = BmConfig { restarts: 1, grad_tol: 1e-4, ..Default::default() };
            let table = graphsdp::experiments::gset_sweep(&g, delta, *replicates, seed, &solver, *samples)?;
            emit(out, &table.summary_csv()?)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| anyhow!(Error::InvalidInput(format!("thread pool: {e}"))))?;
    }
    let seed = cli.seed.unwrap_or(0);
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Generate(a) => generate(a, seed, require_out(out)?),
        Command::Solve(a) => solve(a, cli.seed, require_out(out)?),
        Command::Round(a) => round(a, seed, out),
        Command::Cluster(a) => cluster(a, seed, out),
        Command::Evaluate(a) => evaluate(a, out),
        Command::FixedPoint(a) => fixed_point(a, seed, out),
        Command::Experiment(a) => experiment(a, cli.seed, out),
        Command::Gset { action } => gset(action, seed, out),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let not_converged = err.chain().any(|e| matches!(e.downcast_ref::<Error>(), Some(Error::NotConverged(_))));
    if not_converged {
        EXIT_NOT_CONVERGED
    } else {
        EXIT_INVALID
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
