//! `netlasso` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 infeasible or failed
//! certificate (or a violated error bound), 3 solver non-convergence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use netlasso::certify::{check_lemma1, check_ncc, verify_theorem1, NccQuery, Verdict, DEFAULT_MAX_BOUNDARY};
use netlasso::experiment::{run_experiment, ExperimentConfig, GraphSource, LambdaChoice};
use netlasso::generator::{generate_planted_partition, sample_observations, NoiseConfig, NoiseKind, PlantedPartitionConfig};
use netlasso::graph::{boundary_ids, clustered_signal, Graph, GraphSignal, NodeId, Partition};
use netlasso::io;
use netlasso::sampling::{reinforce_sampled_edges, sample_boundary_aware, sample_uniform, SamplingBudget};
use netlasso::solver::{solve_admm, SolverConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_CERTIFICATE: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(name = "netlasso", version, about = "Recover clustered graph signals from few samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a planted-partition graph with its partition and clustered signal.
    Generate(GenerateArgs),
    /// Build a sampling set.
    Sample(SampleArgs),
    /// Check the local sufficient condition and the compatibility condition.
    Certify(CertifyArgs),
    /// Solve the network Lasso from sampled labels.
    Solve(SolveArgs),
    /// Compare boundary-aware and uniform sampling over seeded trials.
    Experiment(ExperimentArgs),
    /// Certify, solve with lambda = 1/K and check the TV error bound.
    VerifyBound(VerifyBoundArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    PaperLike,
}

#[derive(Args)]
struct GeneratorArgs {
    /// Named configuration; overridden field by field by the flags below.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Comma-separated cluster sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    p_in: Option<f64>,
    #[arg(long)]
    p_out: Option<f64>,
    /// Uniform edge weight.
    #[arg(long)]
    weight: Option<f64>,
    /// Comma-separated cluster values of the true signal; defaults to 1, 2, ...
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coefficients: Option<Vec<f64>>,
}

impl GeneratorArgs {
    fn config(&self, seed: u64) -> anyhow::Result<PlantedPartitionConfig> {
        let mut cfg = match self.preset {
            Some(Preset::PaperLike) => PlantedPartitionConfig::paper_like(seed),
            None => {
                if self.sizes.is_none() {
                    bail!("either --preset or --sizes is required");
                }
                PlantedPartitionConfig {
                    cluster_sizes: Vec::new(),
                    p_in: 1.0,
                    p_out: 0.1,
                    weight: 1.0,
                    seed,
                }
            }
        };
        if let Some(s) = &self.sizes {
            cfg.cluster_sizes = s.clone();
        }
        if let Some(p) = self.p_in {
            cfg.p_in = p;
        }
        if let Some(p) = self.p_out {
            cfg.p_out = p;
        }
        if let Some(w) = self.weight {
            cfg.weight = w;
        }
        Ok(cfg)
    }

    fn coefficients(&self, clusters: usize) -> Vec<f64> {
        self.coefficients
            .clone()
            .unwrap_or_else(|| (1..=clusters).map(|c| c as f64).collect())
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, env = "NETLASSO_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Boundary,
    Uniform,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Required for the boundary strategy.
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "boundary")]
    strategy: Strategy,
    /// Number of nodes; defaults to ceil(N/2).
    #[arg(long)]
    budget: Option<usize>,
    /// Weight factor a serving neighbor must reach relative to the boundary edge.
    #[arg(long, default_value_t = 1.0)]
    factor: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    partition: PathBuf,
    #[arg(long)]
    sampling: PathBuf,
    #[arg(long)]
    l: f64,
    /// Slack bound; defaults to L times the largest boundary weight.
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_BOUNDARY)]
    max_boundary: usize,
    /// Write the full certificate as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    None,
    Gaussian,
    Laplace,
}

impl From<Noise> for NoiseKind {
    fn from(n: Noise) -> Self {
        match n {
            Noise::None => NoiseKind::None,
            Noise::Gaussian => NoiseKind::Gaussian,
            Noise::Laplace => NoiseKind::Laplace,
        }
    }
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long, value_enum, default_value = "none")]
    noise: Noise,
    /// Noise scale.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
}

impl NoiseArgs {
    fn config(&self) -> NoiseConfig {
        NoiseConfig {
            kind: self.noise.into(),
            scale: self.sigma,
            seed: self.noise_seed,
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 1e-6)]
    eps_abs: f64,
    #[arg(long, default_value_t = 1e-5)]
    eps_rel: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// Return the raw ADMM iterate without rounding onto label values.
    #[arg(long)]
    no_polish: bool,
}

impl SolverArgs {
    fn config(&self, lambda: f64) -> SolverConfig {
        SolverConfig {
            rho: self.rho,
            eps_abs: self.eps_abs,
            eps_rel: self.eps_rel,
            max_iters: self.max_iters,
            polish: !self.no_polish,
            ..SolverConfig::with_lambda(lambda)
        }
    }
}

fn parse_lambda(s: &str) -> Result<LambdaChoice, String> {
    if s == "auto" {
        return Ok(LambdaChoice::Auto);
    }
    s.parse::<f64>()
        .map(LambdaChoice::Fixed)
        .map_err(|_| format!("expected a number or `auto`, got `{s}`"))
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Signal file holding the label of every sampled node.
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    sampling: PathBuf,
    /// Penalty, or `auto` for 1/K from the local sufficient condition.
    #[arg(long, value_parser = parse_lambda)]
    lambda: LambdaChoice,
    /// Needed with `--lambda auto`.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Certificate parameter for `--lambda auto`.
    #[arg(long, default_value_t = 1.0)]
    l: f64,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Where to write the recovered signal; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Use a fixed instance instead of drawing graphs.
    #[arg(long, requires_all = ["partition", "signal"], conflicts_with_all = ["preset", "sizes"])]
    graph: Option<PathBuf>,
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long)]
    signal: Option<PathBuf>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    factor: f64,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Penalty, or `auto` for 1/K from the certificate of the boundary-aware set.
    #[arg(long, value_parser = parse_lambda, default_value = "0.01")]
    lambda: LambdaChoice,
    /// Certificate parameter L; the error bound is checked when L > 1.
    #[arg(long, default_value_t = 1.0)]
    l: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_BOUNDARY)]
    max_boundary: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trial drawn in plot.svg.
    #[arg(long, default_value_t = 0)]
    plot_trial: usize,
    #[arg(long, env = "NETLASSO_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct VerifyBoundArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    partition: PathBuf,
    /// True clustered signal.
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    sampling: PathBuf,
    #[arg(long)]
    l: f64,
    /// Raise interior edges at sampled nodes to L times the largest boundary weight.
    #[arg(long)]
    reinforce: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_BOUNDARY)]
    max_boundary: usize,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

/// Error carrying its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: EXIT_USAGE, error }
    }
}

fn fail(code: u8, msg: String) -> Failure {
    Failure { code, error: anyhow!(msg) }
}

type CmdResult = Result<(), Failure>;

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn emit(path: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn load_graph(path: &Path) -> anyhow::Result<Graph> {
    io::read_graph(path).with_context(|| format!("reading graph {}", path.display()))
}

fn load_partition(path: &Path, n: usize) -> anyhow::Result<Partition> {
    io::read_partition(path, n).with_context(|| format!("reading partition {}", path.display()))
}

fn load_signal(path: &Path, n: usize) -> anyhow::Result<GraphSignal> {
    io::read_signal(path, n).with_context(|| format!("reading signal {}", path.display()))
}

fn load_nodes(path: &Path, n: usize) -> anyhow::Result<Vec<NodeId>> {
    io::read_node_set(path, n).with_context(|| format!("reading node set {}", path.display()))
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

fn cmd_generate(a: GenerateArgs) -> CmdResult {
    let cfg = a.generator.config(a.seed)?;
    let (g, f) = generate_planted_partition(&cfg).map_err(anyhow::Error::from)?;
    let x = clustered_signal(&f, &a.generator.coefficients(f.cluster_count())).map_err(anyhow::Error::from)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    write_file(&a.out_dir.join("graph.txt"), &io::write_graph(&g))?;
    write_file(&a.out_dir.join("partition.txt"), &io::write_partition(&f))?;
    write_file(&a.out_dir.join("signal.txt"), &io::write_signal(&x))?;
    let boundary = boundary_ids(&g, &f).map_err(anyhow::Error::from)?.len();
    println!(
        "{}",
        pretty(&json!({
            "nodes": g.node_count(),
            "edges": g.edge_count(),
            "clusters": f.cluster_sizes(),
            "boundary_edges": boundary,
            "seed": a.seed,
        }))
    );
    Ok(())
}

fn cmd_sample(a: SampleArgs) -> CmdResult {
    let g = load_graph(&a.graph)?;
    let n = g.node_count();
    let budget = match a.budget {
        Some(m) => SamplingBudget::new(m, n).map_err(anyhow::Error::from)?,
        None => SamplingBudget::half(n),
    };
    let nodes = match a.strategy {
        Strategy::Boundary => {
            let path = a
                .partition
                .as_ref()
                .ok_or_else(|| anyhow!("--partition is required for the boundary strategy"))?;
            let f = load_partition(path, n)?;
            sample_boundary_aware(&g, &f, budget, a.factor).map_err(anyhow::Error::from)?
        }
        Strategy::Uniform => sample_uniform(&g, budget, a.seed).map_err(anyhow::Error::from)?,
    };
    emit(a.output.as_deref(), &io::write_node_set(&nodes))?;
    Ok(())
}

fn cmd_certify(a: CertifyArgs) -> CmdResult {
    let g = load_graph(&a.graph)?;
    let n = g.node_count();
    let f = load_partition(&a.partition, n)?;
    let m = load_nodes(&a.sampling, n)?;
    let lemma = check_lemma1(&g, &f, &m, a.l).map_err(anyhow::Error::from)?;
    let max_w = boundary_ids(&g, &f)
        .map_err(anyhow::Error::from)?
        .iter()
        .map(|&id| g.weight(id))
        .fold(0.0, f64::max);
    let k = a.k.unwrap_or(a.l * max_w);
    let q = NccQuery {
        graph: &g,
        partition: &f,
        sampling: &m,
        // an empty boundary leaves K unconstrained
        k: if k > 0.0 { k } else { a.l },
        l: a.l,
    };
    let cert = check_ncc(&q, a.max_boundary).map_err(anyhow::Error::from)?;
    if let Some(path) = &a.json {
        write_file(path, &cert.to_json())?;
    }
    println!(
        "{}",
        pretty(&json!({
            "verdict": cert.verdict,
            "k": cert.k,
            "l": cert.l,
            "boundary_edges": cert.boundary.len(),
            "orientations_checked": cert.witnesses.len(),
            "counterexample": cert.counterexample,
            "reason": cert.reason,
            "local_condition": lemma,
        }))
    );
    match cert.verdict {
        Verdict::Holds => Ok(()),
        Verdict::Fails => Err(fail(EXIT_CERTIFICATE, "the compatibility condition fails".into())),
        Verdict::Indeterminate => Err(fail(
            EXIT_CERTIFICATE,
            format!("no verdict: {}", cert.reason.unwrap_or_default()),
        )),
    }
}

fn cmd_solve(a: SolveArgs) -> CmdResult {
    let g = load_graph(&a.graph)?;
    let n = g.node_count();
    let y = load_signal(&a.signal, n)?;
    let m = load_nodes(&a.sampling, n)?;
    let lambda = match a.lambda {
        LambdaChoice::Fixed(l) => l,
        LambdaChoice::Auto => {
            let path = a
                .partition
                .as_ref()
                .ok_or_else(|| anyhow!("--lambda auto needs --partition to certify the sampling set"))?;
            let f = load_partition(path, n)?;
            let lemma = check_lemma1(&g, &f, &m, a.l).map_err(anyhow::Error::from)?;
            match lemma.k {
                Some(k) if k > 0.0 => 1.0 / k,
                _ => {
                    return Err(fail(
                        EXIT_USAGE,
                        format!("no certificate with L={} for this sampling set; pass an explicit --lambda", a.l),
                    ))
                }
            }
        }
    };
    let obs = sample_observations(&y, &m, &a.noise.config()).map_err(anyhow::Error::from)?;
    let res = solve_admm(&g, &obs, &a.solver.config(lambda)).map_err(anyhow::Error::from)?;
    emit(a.output.as_deref(), &io::write_signal(&res.x_hat))?;
    eprintln!(
        "{}",
        pretty(&json!({
            "lambda": lambda,
            "objective": res.objective,
            "empirical_error": res.empirical_error,
            "tv": res.tv,
            "iterations": res.iterations,
            "converged": res.converged,
            "primal_residual": res.primal_residual,
            "dual_residual": res.dual_residual,
        }))
    );
    if !res.converged {
        return Err(fail(
            EXIT_NONCONVERGENCE,
            format!("no convergence within {} iterations", res.iterations),
        ));
    }
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> CmdResult {
    let source = match &a.graph {
        Some(gp) => {
            let graph = load_graph(gp)?;
            let n = graph.node_count();
            let partition = load_partition(a.partition.as_ref().expect("required by clap"), n)?;
            let signal = load_signal(a.signal.as_ref().expect("required by clap"), n)?;
            GraphSource::Fixed { graph, partition, signal }
        }
        None => GraphSource::Generated {
            config: a.generator.config(0)?,
            coefficients: a.generator.coefficients.clone().unwrap_or_default(),
        },
    };
    let cfg = ExperimentConfig {
        source,
        budget: a.budget,
        boundary_factor: a.factor,
        noise_kind: a.noise.noise.into(),
        noise_scale: a.noise.sigma,
        lambda: a.lambda,
        certify_l: a.l,
        max_boundary: a.max_boundary,
        bound_tolerance: 1e-6,
        solver: a.solver.config(0.0),
        trials: a.trials,
        master_seed: a.seed,
    };
    let report = run_experiment(&cfg).map_err(anyhow::Error::from)?;
    let summary = report.summary();
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    write_file(&a.out_dir.join("trials.csv"), &report.trials_csv())?;
    write_file(&a.out_dir.join("nodes.csv"), &report.nodes_csv())?;
    write_file(
        &a.out_dir.join("summary.json"),
        &serde_json::to_string_pretty(&summary).map_err(anyhow::Error::from)?,
    )?;
    let svg = report
        .svg(a.plot_trial)
        .ok_or_else(|| anyhow!("--plot-trial {} is out of range", a.plot_trial))?;
    write_file(&a.out_dir.join("plot.svg"), &svg)?;
    println!("{}", serde_json::to_string_pretty(&summary).map_err(anyhow::Error::from)?);
    if summary.unconverged_solves > 0 {
        return Err(fail(
            EXIT_NONCONVERGENCE,
            format!("{} solves did not converge; results were written", summary.unconverged_solves),
        ));
    }
    Ok(())
}

fn cmd_verify_bound(a: VerifyBoundArgs) -> CmdResult {
    let g0 = load_graph(&a.graph)?;
    let n = g0.node_count();
    let f = load_partition(&a.partition, n)?;
    let x = load_signal(&a.signal, n)?;
    let m = load_nodes(&a.sampling, n)?;
    let g = if a.reinforce {
        reinforce_sampled_edges(&g0, &f, &m, a.l).map_err(anyhow::Error::from)?
    } else {
        g0
    };
    let lemma = check_lemma1(&g, &f, &m, a.l).map_err(anyhow::Error::from)?;
    let Some(k) = lemma.k.filter(|&k| k > 0.0) else {
        return Err(fail(
            EXIT_CERTIFICATE,
            format!("{} boundary edges violate the local condition with L={}", lemma.violations.len(), a.l),
        ));
    };
    let q = NccQuery { graph: &g, partition: &f, sampling: &m, k, l: a.l };
    let ncc = check_ncc(&q, a.max_boundary).map_err(anyhow::Error::from)?;
    let obs = sample_observations(&x, &m, &a.noise.config()).map_err(anyhow::Error::from)?;
    let res = solve_admm(&g, &obs, &a.solver.config(1.0 / k)).map_err(anyhow::Error::from)?;
    let report = verify_theorem1(&g, k, a.l, &x, &res.x_hat, obs.noise_l1().unwrap_or(0.0), a.tolerance)
        .map_err(anyhow::Error::from)?;
    println!(
        "{}",
        pretty(&json!({
            "k": k,
            "l": a.l,
            "lambda": 1.0 / k,
            "ncc": ncc.verdict,
            "converged": res.converged,
            "report": report,
        }))
    );
    if !res.converged {
        return Err(fail(EXIT_NONCONVERGENCE, "solver did not converge".into()));
    }
    if ncc.verdict == Verdict::Fails {
        return Err(fail(EXIT_CERTIFICATE, "the compatibility condition fails".into()));
    }
    if !report.holds {
        return Err(fail(
            EXIT_CERTIFICATE,
            format!("tv error {} exceeds the bound {}", report.tv_error, report.bound),
        ));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::VerifyBound(a) => cmd_verify_bound(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
