//! Boundary-aware versus uniform sampling on clustered graphs.
//!
//! Each trial builds a graph (drawn from a planted-partition config or
//! taken from a fixed instance), picks a boundary-aware sampling set and a
//! uniform one of the same size, observes the true clustered signal on both,
//! solves the network Lasso for each and records the errors.
//!
//! Every random choice of trial `t` is seeded from `(master_seed, t)` alone,
//! so any row of the output can be regenerated in isolation.

use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{check_lemma1, check_ncc, verify_theorem1, CertifyError, NccQuery, Theorem1Report, Verdict};
use crate::generator::{
    generate_planted_partition, sample_observations, GeneratorError, NoiseConfig, NoiseKind,
    PlantedPartitionConfig,
};
use crate::graph::{boundary_ids, clustered_signal, tv, Graph, GraphError, GraphSignal, NodeId, Partition};
use crate::sampling::{sample_boundary_aware, sample_uniform, SamplingBudget, SamplingError};
use crate::solver::{solve_admm, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("trial {trial}: lambda=auto needs a certificate, but {reason}; pass an explicit lambda")]
    LambdaNotCertified { trial: usize, reason: String },
    #[error("trial {trial}: {source}")]
    Generator { trial: usize, source: GeneratorError },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Where each trial's graph comes from.
#[derive(Debug, Clone)]
pub enum GraphSource {
    /// A fresh draw per trial; the config's own seed is replaced.
    Generated {
        config: PlantedPartitionConfig,
        /// Cluster values of the true signal; `1, 2, ...` when empty.
        coefficients: Vec<f64>,
    },
    /// The same instance in every trial.
    Fixed {
        graph: Graph,
        partition: Partition,
        signal: GraphSignal,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaChoice {
    Fixed(f64),
    /// `1/K` from the certificate of the boundary-aware sampling set.
    Auto,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: GraphSource,
    /// Sampling set size; `ceil(N/2)` when `None`.
    pub budget: Option<usize>,
    /// Weight factor for [`sample_boundary_aware`].
    pub boundary_factor: f64,
    pub noise_kind: NoiseKind,
    pub noise_scale: f64,
    pub lambda: LambdaChoice,
    /// Parameter `L` used to certify sampling sets. The error bound is only
    /// checked when `L > 1` and a certificate exists.
    pub certify_l: f64,
    pub max_boundary: usize,
    /// Tolerance added to the error bound.
    pub bound_tolerance: f64,
    /// Solver settings; `lambda` is overwritten per trial.
    pub solver: SolverConfig,
    pub trials: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// `paper-like` graphs, noiseless, budget `N/2`.
    pub fn paper_like(trials: usize, master_seed: u64, lambda: LambdaChoice) -> Self {
        ExperimentConfig {
            source: GraphSource::Generated {
                config: PlantedPartitionConfig::paper_like(0),
                coefficients: Vec::new(),
            },
            budget: None,
            boundary_factor: 1.0,
            noise_kind: NoiseKind::None,
            noise_scale: 0.0,
            lambda,
            certify_l: 1.0,
            max_boundary: crate::certify::DEFAULT_MAX_BOUNDARY,
            bound_tolerance: 1e-6,
            solver: SolverConfig::with_lambda(0.0),
            trials,
            master_seed,
        }
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidConfig(m.to_string()));
        if self.trials == 0 {
            return bad("trial count must be at least one");
        }
        if let LambdaChoice::Fixed(l) = self.lambda {
            if !(l.is_finite() && l >= 0.0) {
                return bad("lambda must be finite and non-negative");
            }
        }
        if !(self.certify_l.is_finite() && self.certify_l > 0.0) {
            return bad("certificate parameter L must be positive");
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return bad("noise scale must be finite and non-negative");
        }
        if let GraphSource::Fixed { graph, partition, signal } = &self.source {
            if partition.node_count() != graph.node_count() || signal.len() != graph.node_count() {
                return bad("fixed graph, partition and signal disagree on the node count");
            }
        }
        Ok(())
    }
}

/// Seeds of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSeeds {
    pub graph: u64,
    pub sampling: u64,
    pub noise: u64,
}

impl TrialSeeds {
    /// Word `0..3` of ChaCha8 stream `trial` under key `master`.
    pub fn derive(master: u64, trial: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master);
        rng.set_stream(trial as u64);
        TrialSeeds {
            graph: rng.next_u64(),
            sampling: rng.next_u64(),
            noise: rng.next_u64(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateSource {
    /// The compatibility condition was checked exhaustively.
    Ncc,
    /// Only the local sufficient condition was checked.
    Lemma1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub k: f64,
    pub l: f64,
    pub source: CertificateSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub sampling: Vec<NodeId>,
    pub x_hat: GraphSignal,
    pub tv_error: f64,
    /// Mean over nodes of `|x_hat - x_true|`.
    pub mad: f64,
    pub noise_l1: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub certificate: Option<CertificateSummary>,
    pub bound: Option<Theorem1Report>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seeds: TrialSeeds,
    pub node_count: usize,
    pub edge_count: usize,
    pub boundary_edges: usize,
    pub lambda: f64,
    pub assignment: Vec<usize>,
    pub x_true: GraphSignal,
    pub boundary: MethodOutcome,
    pub uniform: MethodOutcome,
}

impl TrialRecord {
    /// Strictly lower TV error with boundary-aware sampling.
    pub fn boundary_wins(&self) -> bool {
        self.boundary.tv_error < self.uniform.tv_error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub boundary_wins: usize,
    pub mean_tv_error_boundary: f64,
    pub mean_tv_error_uniform: f64,
    pub median_mad_boundary: f64,
    pub median_mad_uniform: f64,
    pub unconverged_solves: usize,
    pub bound_checks: usize,
    pub bound_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub trials: Vec<TrialRecord>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

impl ExperimentReport {
    pub fn summary(&self) -> Summary {
        let n = self.trials.len();
        let mean = |f: fn(&TrialRecord) -> f64| self.trials.iter().map(f).sum::<f64>() / n as f64;
        let outcomes = || self.trials.iter().flat_map(|t| [&t.boundary, &t.uniform]);
        Summary {
            trials: n,
            boundary_wins: self.trials.iter().filter(|t| t.boundary_wins()).count(),
            mean_tv_error_boundary: mean(|t| t.boundary.tv_error),
            mean_tv_error_uniform: mean(|t| t.uniform.tv_error),
            median_mad_boundary: median(self.trials.iter().map(|t| t.boundary.mad).collect()),
            median_mad_uniform: median(self.trials.iter().map(|t| t.uniform.mad).collect()),
            unconverged_solves: outcomes().filter(|o| !o.converged).count(),
            bound_checks: outcomes().filter(|o| o.bound.is_some()).count(),
            bound_violations: outcomes()
                .filter(|o| o.bound.as_ref().is_some_and(|b| !b.holds))
                .count(),
        }
    }

    /// One row per trial.
    pub fn trials_csv(&self) -> String {
        let mut out = String::from(
            "trial,graph_seed,sampling_seed,noise_seed,nodes,edges,boundary_edges,lambda,\
             tv_error_boundary,tv_error_uniform,mad_boundary,mad_uniform,\
             noise_l1_boundary,noise_l1_uniform,converged_boundary,converged_uniform,\
             bound_boundary,bound_uniform,bound_holds_boundary,bound_holds_uniform\n",
        );
        let opt = |b: &Option<Theorem1Report>| b.as_ref().map_or(String::new(), |r| r.bound.to_string());
        let holds = |b: &Option<Theorem1Report>| b.as_ref().map_or(String::new(), |r| r.holds.to_string());
        for t in &self.trials {
            let (b, u) = (&t.boundary, &t.uniform);
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                t.trial,
                t.seeds.graph,
                t.seeds.sampling,
                t.seeds.noise,
                t.node_count,
                t.edge_count,
                t.boundary_edges,
                t.lambda,
                b.tv_error,
                u.tv_error,
                b.mad,
                u.mad,
                b.noise_l1,
                u.noise_l1,
                b.converged,
                u.converged,
                opt(&b.bound),
                opt(&u.bound),
                holds(&b.bound),
                holds(&u.bound),
            )
            .expect("writing to a String");
        }
        out
    }

    /// One row per (trial, node).
    pub fn nodes_csv(&self) -> String {
        let mut out = String::from(
            "trial,node,cluster,x_true,x_hat_boundary,x_hat_uniform,sampled_boundary,sampled_uniform\n",
        );
        for t in &self.trials {
            let mut in_b = vec![false; t.node_count];
            let mut in_u = vec![false; t.node_count];
            t.boundary.sampling.iter().for_each(|&v| in_b[v] = true);
            t.uniform.sampling.iter().for_each(|&v| in_u[v] = true);
            for v in 0..t.node_count {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    t.trial,
                    v,
                    t.assignment[v],
                    t.x_true[v],
                    t.boundary.x_hat[v],
                    t.uniform.x_hat[v],
                    in_b[v] as u8,
                    in_u[v] as u8,
                )
                .expect("writing to a String");
            }
        }
        out
    }

    /// Per-node plot of the true signal and both recoveries for one trial.
    ///
    /// Each series is a `<g class="series">` element whose `data-values`
    /// attribute lists the plotted values exactly as they appear in
    /// [`Self::nodes_csv`].
    pub fn svg(&self, trial: usize) -> Option<String> {
        let t = self.trials.iter().find(|t| t.trial == trial)?;
        let series: [(&str, &str, &[f64]); 3] = [
            ("true", "#222222", t.x_true.values()),
            ("boundary", "#d95f02", t.boundary.x_hat.values()),
            ("uniform", "#1b9e77", t.uniform.x_hat.values()),
        ];
        Some(render_svg(t.trial, &series))
    }
}

fn render_svg(trial: usize, series: &[(&str, &str, &[f64])]) -> String {
    const W: f64 = 720.0;
    const H: f64 = 360.0;
    const PAD: f64 = 48.0;
    let n = series[0].2.len();
    let all = series.iter().flat_map(|s| s.2.iter().copied());
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let px = |i: usize| PAD + (W - 2.0 * PAD) * (i as f64 + 0.5) / n.max(1) as f64;
    let py = |v: f64| H - PAD - (H - 2.0 * PAD) * (v - lo) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">trial {trial}: signal per node</text>"#,
        W / 2.0
    );
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{0}" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    for (v, label) in [(lo, lo), (hi, hi)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{label:.3}</text>"#,
            PAD - 4.0,
            py(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">node</text>"#,
        W / 2.0,
        H - 12.0
    );
    for (k, (name, color, values)) in series.iter().enumerate() {
        let data: Vec<String> = values.iter().map(f64::to_string).collect();
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", px(i), py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<g class="series" data-name="{name}" data-values="{}">"#,
            data.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        for p in &points {
            let (x, y) = p.split_once(',').expect("formatted above");
            let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
        }
        let ly = PAD + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="12" fill="{color}">{name}</text>"#,
            W - PAD - 70.0
        );
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

struct Instance {
    graph: Graph,
    partition: Partition,
    x: GraphSignal,
}

fn build_instance(cfg: &ExperimentConfig, trial: usize, seeds: TrialSeeds) -> Result<Instance, ExperimentError> {
    match &cfg.source {
        GraphSource::Fixed { graph, partition, signal } => Ok(Instance {
            graph: graph.clone(),
            partition: partition.clone(),
            x: signal.clone(),
        }),
        GraphSource::Generated { config, coefficients } => {
            let config = PlantedPartitionConfig {
                seed: seeds.graph,
                ..config.clone()
            };
            let (graph, partition) = generate_planted_partition(&config)
                .map_err(|source| ExperimentError::Generator { trial, source })?;
            let coeffs: Vec<f64> = if coefficients.is_empty() {
                (1..=partition.cluster_count()).map(|c| c as f64).collect()
            } else {
                coefficients.clone()
            };
            let x = clustered_signal(&partition, &coeffs)?;
            Ok(Instance { graph, partition, x })
        }
    }
}

/// Certifies `sampling` with parameter `L`: exhaustively when the boundary
/// is small enough, else by the local sufficient condition.
fn certify(
    inst: &Instance,
    sampling: &[NodeId],
    l: f64,
    max_boundary: usize,
) -> Result<Result<CertificateSummary, String>, ExperimentError> {
    let lemma = check_lemma1(&inst.graph, &inst.partition, sampling, l)?;
    let Some(k) = lemma.k.filter(|&k| k > 0.0) else {
        return Ok(Err(if lemma.degenerate {
            "the partition has no boundary edges".into()
        } else {
            format!("{} boundary edges lack a heavy sampled neighbor", lemma.violations.len())
        }));
    };
    let q = NccQuery {
        graph: &inst.graph,
        partition: &inst.partition,
        sampling,
        k,
        l,
    };
    let ncc = check_ncc(&q, max_boundary)?;
    Ok(match ncc.verdict {
        Verdict::Holds => Ok(CertificateSummary { k, l, source: CertificateSource::Ncc }),
        Verdict::Fails => Err(format!("the compatibility condition fails with K={k}, L={l}")),
        Verdict::Indeterminate => Ok(CertificateSummary { k, l, source: CertificateSource::Lemma1 }),
    })
}

fn run_method(
    cfg: &ExperimentConfig,
    trial: usize,
    inst: &Instance,
    sampling: Vec<NodeId>,
    noise: &NoiseConfig,
    lambda: f64,
    certificate: Option<CertificateSummary>,
) -> Result<MethodOutcome, ExperimentError> {
    let obs = sample_observations(&inst.x, &sampling, noise)
        .map_err(|source| ExperimentError::Generator { trial, source })?;
    let solver = SolverConfig { lambda, ..cfg.solver.clone() };
    let res = solve_admm(&inst.graph, &obs, &solver)?;
    let diff = &res.x_hat - &inst.x;
    let tv_error = tv(&inst.graph, &diff)?;
    let mad = diff.values().iter().map(|d| d.abs()).sum::<f64>() / diff.len() as f64;
    let noise_l1 = obs.noise_l1().unwrap_or(0.0);
    let bound = match &certificate {
        Some(c) if c.l > 1.0 && (c.k - 1.0 / lambda).abs() <= 1e-12 * c.k => Some(verify_theorem1(
            &inst.graph,
            c.k,
            c.l,
            &inst.x,
            &res.x_hat,
            noise_l1,
            cfg.bound_tolerance,
        )?),
        _ => None,
    };
    Ok(MethodOutcome {
        sampling,
        x_hat: res.x_hat,
        tv_error,
        mad,
        noise_l1,
        objective: res.objective,
        iterations: res.iterations,
        converged: res.converged,
        certificate,
        bound,
    })
}

/// Runs trial `trial` of `cfg` on its own.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<TrialRecord, ExperimentError> {
    cfg.validate()?;
    let seeds = TrialSeeds::derive(cfg.master_seed, trial);
    let inst = build_instance(cfg, trial, seeds)?;
    let n = inst.graph.node_count();
    let budget = match cfg.budget {
        Some(m) => SamplingBudget::new(m, n)?,
        None => SamplingBudget::half(n),
    };
    let m1 = sample_boundary_aware(&inst.graph, &inst.partition, budget, cfg.boundary_factor)?;
    let m2 = sample_uniform(&inst.graph, budget, seeds.sampling)?;

    let cert1 = certify(&inst, &m1, cfg.certify_l, cfg.max_boundary)?;
    let cert2 = certify(&inst, &m2, cfg.certify_l, cfg.max_boundary)?;
    let lambda = match cfg.lambda {
        LambdaChoice::Fixed(l) => l,
        LambdaChoice::Auto => match &cert1 {
            Ok(c) => 1.0 / c.k,
            Err(reason) => {
                return Err(ExperimentError::LambdaNotCertified { trial, reason: reason.clone() })
            }
        },
    };
    let noise = NoiseConfig {
        kind: cfg.noise_kind,
        scale: cfg.noise_scale,
        seed: seeds.noise,
    };
    let boundary = run_method(cfg, trial, &inst, m1, &noise, lambda, cert1.ok())?;
    let uniform = run_method(cfg, trial, &inst, m2, &noise, lambda, cert2.ok())?;
    Ok(TrialRecord {
        trial,
        seeds,
        node_count: n,
        edge_count: inst.graph.edge_count(),
        boundary_edges: boundary_ids(&inst.graph, &inst.partition)?.len(),
        lambda,
        assignment: inst.partition.assignment().to_vec(),
        x_true: inst.x,
        boundary,
        uniform,
    })
}

/// Runs all trials in parallel; records are in trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport { trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize, lambda: LambdaChoice) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::paper_like(trials, 11, lambda);
        cfg.source = GraphSource::Generated {
            config: PlantedPartitionConfig {
                cluster_sizes: vec![4, 4],
                p_in: 1.0,
                p_out: 0.2,
                weight: 1.0,
                seed: 0,
            },
            coefficients: vec![],
        };
        cfg
    }

    #[test]
    fn seeds_depend_on_master_and_trial_only() {
        let a = TrialSeeds::derive(5, 3);
        assert_eq!(a, TrialSeeds::derive(5, 3));
        assert_ne!(a, TrialSeeds::derive(5, 4));
        assert_ne!(a, TrialSeeds::derive(6, 3));
        assert_ne!(a.graph, a.sampling);
    }

    #[test]
    fn trial_rows_are_reproducible_in_isolation() {
        let cfg = small(4, LambdaChoice::Fixed(0.05));
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.trials.len(), 4);
        for (i, t) in report.trials.iter().enumerate() {
            assert_eq!(t.trial, i);
            assert_eq!(&run_trial(&cfg, i).unwrap(), t);
        }
        assert_eq!(report.trials_csv(), run_experiment(&cfg).unwrap().trials_csv());
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(
            run_experiment(&small(0, LambdaChoice::Fixed(0.1))),
            Err(ExperimentError::InvalidConfig(_))
        ));
    }

    #[test]
    fn auto_lambda_without_certificate_is_an_error() {
        let (g, f, _) = crate::certify::two_cluster_fixture();
        let x = clustered_signal(&f, &[1.0, 2.0]).unwrap();
        let mut cfg = small(1, LambdaChoice::Auto);
        cfg.source = GraphSource::Fixed { graph: g, partition: f, signal: x };
        cfg.budget = Some(1);
        let err = run_experiment(&cfg).unwrap_err();
        assert!(matches!(err, ExperimentError::LambdaNotCertified { .. }), "{err}");
        assert!(err.to_string().contains("explicit lambda"));
    }

    #[test]
    fn auto_lambda_on_the_fixture_recovers_exactly_and_checks_the_bound() {
        let (g, f, _) = crate::certify::two_cluster_fixture();
        let x = clustered_signal(&f, &[1.0, 2.0]).unwrap();
        let mut cfg = small(1, LambdaChoice::Auto);
        cfg.source = GraphSource::Fixed { graph: g, partition: f, signal: x };
        cfg.certify_l = 4.0;
        let t = &run_experiment(&cfg).unwrap().trials[0];
        assert_eq!(t.boundary.sampling, vec![0, 3]);
        assert_eq!(t.lambda, 0.25);
        let cert = t.boundary.certificate.as_ref().unwrap();
        assert_eq!((cert.k, cert.source), (4.0, CertificateSource::Ncc));
        assert!(t.boundary.tv_error <= 1e-6, "{:?}", t.boundary);
        assert!(t.boundary.bound.as_ref().unwrap().holds);
    }

    #[test]
    fn csv_and_svg_agree() {
        let report = run_experiment(&small(2, LambdaChoice::Fixed(0.05))).unwrap();
        let nodes = report.nodes_csv();
        let svg = report.svg(1).unwrap();
        let rows: Vec<Vec<&str>> = nodes
            .lines()
            .skip(1)
            .map(|l| l.split(',').collect::<Vec<_>>())
            .filter(|r| r[0] == "1")
            .collect();
        let series: Vec<(String, Vec<String>)> = svg
            .lines()
            .filter(|l| l.starts_with("<g class=\"series\""))
            .map(|l| {
                let name = l.split("data-name=\"").nth(1).unwrap().split('"').next().unwrap();
                let vals = l.split("data-values=\"").nth(1).unwrap().split('"').next().unwrap();
                (name.to_string(), vals.split(' ').map(String::from).collect())
            })
            .collect();
        assert_eq!(series.len(), 3);
        for (k, (_, vals)) in series.iter().enumerate() {
            let column: Vec<String> = rows.iter().map(|r| r[3 + k].to_string()).collect();
            assert_eq!(vals, &column);
        }
        assert!(report.svg(9).is_none());
    }

    #[test]
    fn median_handles_even_and_odd_lengths() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
