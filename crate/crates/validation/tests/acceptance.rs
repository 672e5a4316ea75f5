//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a non-zero status if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netlasso::certify::{
    check_lemma1, check_ncc, two_cluster_fixture, verify_certificate, verify_theorem1, NccQuery,
    Verdict,
};
use netlasso::experiment::{run_experiment, ExperimentConfig, LambdaChoice, TrialSeeds};
use netlasso::flow::{
    feasible_flow_units, max_flow, verify_cut, verify_witness, Feasibility, FlowNetwork,
    QuantizedDemands, Quantizer,
};
use netlasso::generator::{
    generate_planted_partition, sample_observations, NoiseConfig, PlantedPartitionConfig,
};
use netlasso::graph::{boundary_ids, clustered_signal, tv, validate_graph, Graph};
use netlasso::sampling::{reinforce_sampled_edges, sample_boundary_aware, SamplingBudget};
use netlasso::solver::{solve_admm, solve_oracle, Observations, SolverConfig};

/// Seed shared by every randomized criterion.
const MASTER_SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.detail = format!("{}; {:.2?}", out.detail, elapsed);
    if let Some(limit) = limit {
        if elapsed >= limit {
            out.pass = false;
            out.detail = format!("{} exceeds {:?}", out.detail, limit);
        }
    }
    out
}

fn exact_recovery_on_fixture() -> Outcome {
    let (g, f, m) = two_cluster_fixture();
    let x = clustered_signal(&f, &[1.0, 2.0]).unwrap();
    let q = NccQuery {
        graph: &g,
        partition: &f,
        sampling: &m,
        k: 4.0,
        l: 4.0,
    };
    let cert = check_ncc(&q, 16).unwrap();
    let obs = Observations::exact(&x, &m).unwrap();
    let res = solve_admm(&g, &obs, &SolverConfig::for_certificate(4.0).unwrap()).unwrap();
    let dev = res.x_hat.max_abs_diff(&x);
    let err = tv(&g, &(&res.x_hat - &x)).unwrap();
    Outcome {
        pass: cert.verdict == Verdict::Holds && res.converged && dev <= 1e-6 && err <= 1e-6,
        detail: format!("ncc {:?}, max deviation {dev:e}, tv error {err:e}", cert.verdict),
    }
}

fn error_bound_on_paper_like() -> Outcome {
    const L: f64 = 2.0;
    let mut certified = 0;
    let mut violations = 0;
    let mut unconverged = 0;
    let mut worst_ratio = 0.0f64;
    let mut boundary_sizes = (usize::MAX, 0);
    for t in 0..100 {
        let seeds = TrialSeeds::derive(MASTER_SEED, t);
        let (g0, f) = generate_planted_partition(&PlantedPartitionConfig::paper_like(seeds.graph)).unwrap();
        let m = sample_boundary_aware(&g0, &f, SamplingBudget::half(g0.node_count()), 1.0).unwrap();
        let g = reinforce_sampled_edges(&g0, &f, &m, L).unwrap();
        let nb = boundary_ids(&g, &f).unwrap().len();
        boundary_sizes = (boundary_sizes.0.min(nb), boundary_sizes.1.max(nb));
        let Some(k) = check_lemma1(&g, &f, &m, L).unwrap().k else {
            continue;
        };
        certified += 1;
        let x = clustered_signal(&f, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let sigma = if t % 2 == 0 { 0.01 } else { 0.1 };
        let obs = sample_observations(&x, &m, &NoiseConfig::laplace(sigma, seeds.noise)).unwrap();
        let res = solve_admm(&g, &obs, &SolverConfig::for_certificate(k).unwrap()).unwrap();
        unconverged += usize::from(!res.converged);
        let report = verify_theorem1(&g, k, L, &x, &res.x_hat, obs.noise_l1().unwrap(), 1e-6).unwrap();
        violations += usize::from(!report.holds);
        worst_ratio = worst_ratio.max(report.tv_error / report.bound);
    }
    Outcome {
        pass: certified == 100 && violations == 0,
        detail: format!(
            "{certified}/100 sampling sets meet the local condition with L={L}; bound violated in \
             {violations}; worst error/bound {worst_ratio:.1}; boundary sizes {}..{}; {unconverged} unconverged",
            boundary_sizes.0, boundary_sizes.1
        ),
    }
}

fn random_tiny_graph(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    let n = rng.random_range(2..=max_n);
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.6) {
                edges.push((i, j));
                weights.push(rng.random_range(0.5..=2.0));
            }
        }
    }
    validate_graph(&edges, &weights, n).unwrap()
}

fn solver_matches_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let lambdas = [0.1, 0.5, 1.0, 2.0];
    let mut worst = 0.0f64;
    let mut failures = 0;
    for t in 0..200 {
        let g = random_tiny_graph(&mut rng, 6);
        let n = g.node_count();
        let k = rng.random_range(1..=n.min(3));
        let mut nodes = rand::seq::index::sample(&mut rng, n, k).into_vec();
        nodes.sort_unstable();
        let labels = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
        let obs = Observations::new(nodes, labels).unwrap();
        let lambda = lambdas[t % lambdas.len()];
        let (opt, _) = solve_oracle(&g, &obs, lambda).unwrap();
        let res = solve_admm(&g, &obs, &SolverConfig::with_lambda(lambda)).unwrap();
        let gap = (res.objective - opt).abs() / (1.0 + opt);
        worst = worst.max(gap);
        failures += usize::from(gap > 1e-4);
    }
    Outcome {
        pass: failures == 0,
        detail: format!("{failures}/200 outside tolerance; worst relative gap {worst:e}"),
    }
}

fn flow_matches_brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let mut net = FlowNetwork::new(n);
        for _ in 0..rng.random_range(0..=3 * n) {
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            if a != b {
                net.add_arc(a, b, rng.random_range(0..20)).unwrap();
            }
        }
        let value = max_flow(&net, 0, n - 1).unwrap().value;
        mismatches += usize::from(value != common::brute_min_cut(&net, 0, n - 1));
    }

    let q = Quantizer::new(1.0);
    let (mut feasible, mut rejected) = (0, 0);
    for _ in 0..100 {
        let g = random_tiny_graph(&mut rng, 8);
        let g = g.with_weights(g.weights().iter().map(|w| w.round()).collect()).unwrap();
        let n = g.node_count();
        let d = QuantizedDemands {
            injections: (0..n).map(|_| rng.random_range(-3..=3)).collect(),
            slack: (0..n).map(|_| rng.random_bool(0.4)).collect(),
            slack_bound: rng.random_range(0..4),
        };
        let excluded = vec![false; g.edge_count()];
        match feasible_flow_units(&g, &excluded, &d, q).unwrap() {
            Feasibility::Feasible(w) => {
                feasible += 1;
                rejected += usize::from(verify_witness(&g, &excluded, &d, q, &w).is_err());
            }
            Feasibility::Infeasible(c) => rejected += usize::from(!verify_cut(&g, &excluded, &d, q, &c)),
        }
    }
    Outcome {
        pass: mismatches == 0 && rejected == 0,
        detail: format!(
            "{mismatches}/100 max-flow mismatches; {rejected} rejected certificates \
             ({feasible} feasible, {} infeasible)",
            100 - feasible
        ),
    }
}

fn local_condition_implies_ncc() -> Outcome {
    const L: f64 = 1.0;
    let template = PlantedPartitionConfig {
        cluster_sizes: vec![6, 6, 6],
        p_in: 0.8,
        p_out: 0.05,
        weight: 1.0,
        seed: 0,
    };
    let (mut instances, mut holds, mut verified, mut drawn) = (0, 0, 0, 0);
    let mut first_failure = None;
    while instances < 50 && drawn < 10_000 {
        let seeds = TrialSeeds::derive(MASTER_SEED, drawn);
        drawn += 1;
        let cfg = PlantedPartitionConfig { seed: seeds.graph, ..template.clone() };
        let Ok((g, f)) = generate_planted_partition(&cfg) else {
            continue;
        };
        if boundary_ids(&g, &f).unwrap().len() > 12 {
            continue;
        }
        let m = sample_boundary_aware(&g, &f, SamplingBudget::half(g.node_count()), 1.0).unwrap();
        let Some(k) = check_lemma1(&g, &f, &m, L).unwrap().k else {
            continue;
        };
        instances += 1;
        let q = NccQuery {
            graph: &g,
            partition: &f,
            sampling: &m,
            k,
            l: L,
        };
        let cert = check_ncc(&q, 16).unwrap();
        if cert.verdict == Verdict::Holds {
            holds += 1;
            verified += usize::from(verify_certificate(&q, &cert).is_ok());
        } else if first_failure.is_none() {
            let cut = &cert.counterexample.as_ref().unwrap().cut;
            first_failure = Some(format!(
                "first failure: draw {}, {:?} cut on {} nodes needs {} units, capacity {}",
                drawn - 1,
                cut.kind,
                cut.nodes.len(),
                cut.required,
                cut.capacity
            ));
        }
    }
    Outcome {
        pass: instances == 50 && holds == 50 && verified == 50,
        detail: format!(
            "ncc holds on {holds}/{instances} instances meeting the local condition; \
             {verified} witness sets re-verified{}",
            first_failure.map(|s| format!("; {s}")).unwrap_or_default()
        ),
    }
}

fn boundary_sampling_beats_uniform() -> Outcome {
    let cfg = ExperimentConfig::paper_like(20, MASTER_SEED, LambdaChoice::Fixed(0.01));
    let report = run_experiment(&cfg).unwrap();
    let s = report.summary();
    let ratio_ok = s.median_mad_boundary <= 0.5 * s.median_mad_uniform;
    Outcome {
        pass: s.boundary_wins >= 18 && ratio_ok,
        detail: format!(
            "boundary-aware wins {}/20; mean tv error {:.3} vs {:.3}; median mad {:.4} vs {:.4}; \
             {} unconverged",
            s.boundary_wins,
            s.mean_tv_error_boundary,
            s.mean_tv_error_uniform,
            s.median_mad_boundary,
            s.median_mad_uniform,
            s.unconverged_solves
        ),
    }
}

fn invariant_suites() -> Outcome {
    let suites = common::suites();
    let failed: Vec<String> = suites
        .iter()
        .filter_map(|(name, run)| run().err().map(|e| format!("{name}: {e}")))
        .collect();
    Outcome {
        pass: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} property suites passed", suites.len())
        } else {
            failed.join(" | ")
        },
    }
}

/// Name, time limit and check.
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("noiseless exact recovery on the two-cluster fixture", Some(Duration::from_secs(1)), exact_recovery_on_fixture),
        ("error bound over 100 noisy paper-like trials", Some(Duration::from_secs(60)), error_bound_on_paper_like),
        ("ADMM matches the brute-force oracle", Some(Duration::from_secs(30)), solver_matches_oracle),
        ("max flow and feasibility certificates", None, flow_matches_brute_force),
        ("local sufficient condition implies ncc", None, local_condition_implies_ncc),
        ("boundary-aware sampling beats uniform sampling", Some(Duration::from_secs(60)), boundary_sampling_beats_uniform),
        ("invariant property suites", None, invariant_suites),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let out = timed(limit, run);
        failed += usize::from(!out.pass);
        println!(
            "criterion {}: {} - {name}: {}",
            i + 1,
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    println!("acceptance: {}/7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
