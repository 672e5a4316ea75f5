//! Shared generators, brute-force oracles and the property suites.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use netlasso::certify::{check_ncc, NccQuery, Verdict};
use netlasso::flow::{
    feasible_flow_units, max_flow, verify_cut, verify_witness, Feasibility, FlowNetwork,
    QuantizedDemands, Quantizer,
};
use netlasso::graph::{
    boundary, boundary_ids, clustered_signal, tv, tv_restricted, validate_graph, Edge, Graph,
    GraphSignal, NodeId, Partition,
};
use netlasso::solver::{objective, solve_oracle, Observations};

/// Undirected graph on `2..=max_n` nodes with weights in `[w_lo, w_hi]`.
pub fn arb_graph(max_n: usize, w_lo: f64, w_hi: f64) -> impl Strategy<Value = Graph> {
    (2..=max_n)
        .prop_flat_map(move |n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                prop::collection::vec(any::<bool>(), pairs),
                prop::collection::vec(w_lo..=w_hi, pairs),
            )
        })
        .prop_map(|(n, keep, w)| {
            let mut edges = Vec::new();
            let mut weights = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if keep[k] {
                        edges.push((i, j));
                        weights.push(w[k]);
                    }
                    k += 1;
                }
            }
            validate_graph(&edges, &weights, n).unwrap()
        })
}

pub fn arb_signal(n: usize) -> impl Strategy<Value = GraphSignal> {
    prop::collection::vec(-10.0..10.0f64, n).prop_map(|v| GraphSignal::new(v).unwrap())
}

/// Graph together with a partition into at most `max_clusters` clusters.
pub fn arb_partitioned(
    max_n: usize,
    max_clusters: usize,
    w_lo: f64,
    w_hi: f64,
) -> impl Strategy<Value = (Graph, Partition)> {
    arb_graph(max_n, w_lo, w_hi).prop_flat_map(move |g| {
        let n = g.node_count();
        prop::collection::vec(0..max_clusters, n).prop_map(move |raw| {
            // compact labels so no cluster is empty
            let mut map = vec![usize::MAX; max_clusters];
            let mut next = 0;
            let assignment: Vec<usize> = raw
                .iter()
                .map(|&c| {
                    if map[c] == usize::MAX {
                        map[c] = next;
                        next += 1;
                    }
                    map[c]
                })
                .collect();
            (g.clone(), Partition::from_assignment(&assignment).unwrap())
        })
    })
}

/// Nonempty sorted subset of `0..n`.
pub fn arb_subset(n: usize) -> impl Strategy<Value = Vec<NodeId>> {
    prop::collection::vec(any::<bool>(), n).prop_filter_map("empty subset", |bits| {
        let s: Vec<NodeId> = (0..bits.len()).filter(|&i| bits[i]).collect();
        (!s.is_empty()).then_some(s)
    })
}

/// Minimum `s-t` cut by enumerating every node set containing `s` but not `t`.
pub fn brute_min_cut(net: &FlowNetwork, s: NodeId, t: NodeId) -> i64 {
    let n = net.node_count();
    let mut best = i64::MAX;
    for mask in 0u32..(1 << n) {
        if mask >> s & 1 == 0 || mask >> t & 1 == 1 {
            continue;
        }
        let cut: i64 = net
            .arcs()
            .iter()
            .filter(|a| mask >> a.from & 1 == 1 && mask >> a.to & 1 == 0)
            .map(|a| a.capacity)
            .sum();
        best = best.min(cut);
    }
    best
}

/// Random directed network on `2..=max_n` nodes with source 0 and sink `n-1`.
pub fn arb_network(max_n: usize) -> impl Strategy<Value = FlowNetwork> {
    (2..=max_n)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec((0..n, 0..n, 0i64..20), 0..=3 * n),
            )
        })
        .prop_map(|(n, arcs)| {
            let mut net = FlowNetwork::new(n);
            for (a, b, c) in arcs {
                if a != b {
                    net.add_arc(a, b, c).unwrap();
                }
            }
            net
        })
}

/// Demands on a graph with integral weights, so unit-level data are exact.
pub fn arb_demands(max_n: usize) -> impl Strategy<Value = (Graph, QuantizedDemands)> {
    arb_graph(max_n, 1.0, 4.0)
        .prop_map(|g| {
            let w: Vec<f64> = g.weights().iter().map(|w| w.round()).collect();
            g.with_weights(w).unwrap()
        })
        .prop_flat_map(|g| {
            let n = g.node_count();
            (
                Just(g),
                prop::collection::vec(-4i64..=4, n),
                prop::collection::vec(any::<bool>(), n),
                0i64..4,
            )
        })
        .prop_map(|(g, inj, slack, bound)| {
            (
                g,
                QuantizedDemands {
                    injections: inj,
                    slack,
                    slack_bound: bound,
                },
            )
        })
}

/// Quantizer with one unit per unit of weight.
pub fn unit_quantizer() -> Quantizer {
    Quantizer::new(1.0)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg.into()))
    }
}

fn runner(cases: u32, seed: u8) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

fn run<S: Strategy>(
    cases: u32,
    seed: u8,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases, seed)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

pub fn tv_homogeneity() -> Result<(), String> {
    let s = arb_graph(10, 0.1, 5.0).prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), arb_signal(n), -5.0..5.0f64)
    });
    run(256, 1, s, |(g, x, a)| {
        let lhs = tv(&g, &x.scale(a)).unwrap();
        let rhs = a.abs() * tv(&g, &x).unwrap();
        check(close(lhs, rhs, 1e-12), format!("{lhs} vs {rhs}"))
    })
}

pub fn tv_triangle() -> Result<(), String> {
    let s = arb_graph(10, 0.1, 5.0).prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), arb_signal(n), arb_signal(n))
    });
    run(256, 2, s, |(g, x, y)| {
        let sum = tv(&g, &(&x + &y)).unwrap();
        let bound = tv(&g, &x).unwrap() + tv(&g, &y).unwrap();
        check(sum <= bound * (1.0 + 1e-12) + 1e-12, format!("{sum} > {bound}"))
    })
}

pub fn tv_zero_iff_component_constant() -> Result<(), String> {
    let s = arb_graph(10, 0.1, 5.0).prop_flat_map(|g| {
        let n = g.node_count();
        (
            Just(g),
            prop::collection::vec(-10.0..10.0f64, n),
            0..n,
            0.5..3.0f64,
        )
    });
    run(256, 3, s, |(g, levels, pick, bump)| {
        let comp = g.components();
        let x = GraphSignal::new(comp.iter().map(|&c| levels[c]).collect()).unwrap();
        check(tv(&g, &x).unwrap() == 0.0, "component-constant signal has nonzero TV")?;
        let mut v = x.into_inner();
        v[pick] += bump;
        let bumped = GraphSignal::new(v).unwrap();
        let isolated = g.degree(pick) == 0;
        let t = tv(&g, &bumped).unwrap();
        check((t == 0.0) == isolated, format!("tv {t}, isolated {isolated}"))
    })
}

pub fn tv_restricted_additivity() -> Result<(), String> {
    let s = arb_graph(10, 0.1, 5.0).prop_flat_map(|g| {
        let (n, m) = (g.node_count(), g.edge_count());
        (Just(g), arb_signal(n), prop::collection::vec(any::<bool>(), m))
    });
    run(256, 4, s, |(g, x, split)| {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (e, &side) in g.edges().iter().zip(&split) {
            if side { a.push(*e) } else { b.push(*e) }
        }
        let total = tv(&g, &x).unwrap();
        let parts = tv_restricted(&g, &x, &a).unwrap() + tv_restricted(&g, &x, &b).unwrap();
        check(close(total, parts, 1e-12), format!("{total} vs {parts}"))?;
        check(tv_restricted(&g, &x, &[]).unwrap() == 0.0, "empty set")
    })
}

pub fn boundary_identity() -> Result<(), String> {
    let s = arb_partitioned(10, 4, 0.1, 5.0).prop_flat_map(|(g, f)| {
        let k = f.cluster_count();
        (Just(g), Just(f), prop::collection::vec(-10.0..10.0f64, k))
    });
    run(256, 5, s, |(g, f, coeffs)| {
        let x = clustered_signal(&f, &coeffs).unwrap();
        let d = boundary(&g, &f).unwrap();
        let inner: Vec<Edge> = g.edges().iter().copied().filter(|e| !d.contains(e)).collect();
        let total = tv(&g, &x).unwrap();
        check(
            total == tv_restricted(&g, &x, &d).unwrap(),
            "TV of a clustered signal differs from its boundary TV",
        )?;
        check(tv_restricted(&g, &x, &inner).unwrap() == 0.0, "interior TV nonzero")
    })
}

pub fn boundary_relabel_invariance() -> Result<(), String> {
    let s = arb_partitioned(10, 4, 0.1, 5.0).prop_flat_map(|(g, f)| {
        let k = f.cluster_count();
        (Just(g), Just(f), Just((0..k).collect::<Vec<_>>()).prop_shuffle())
    });
    run(256, 6, s, |(g, f, perm)| {
        let relabeled: Vec<usize> = f.assignment().iter().map(|&c| perm[c]).collect();
        let f2 = Partition::from_assignment(&relabeled).unwrap();
        check(
            boundary(&g, &f).unwrap() == boundary(&g, &f2).unwrap(),
            "boundary changed under cluster relabeling",
        )
    })
}

/// Small NCC instances: at most 7 nodes and a boundary of at most 8 edges.
fn arb_ncc() -> impl Strategy<Value = (Graph, Partition, Vec<NodeId>, f64, f64)> {
    arb_partitioned(7, 3, 0.5, 3.0)
        .prop_filter("boundary too large", |(g, f)| boundary_ids(g, f).unwrap().len() <= 8)
        .prop_flat_map(|(g, f)| {
            let n = g.node_count();
            (Just(g), Just(f), arb_subset(n), 0.1..6.0f64, 0.5..3.0f64)
        })
}

fn verdict(g: &Graph, f: &Partition, m: &[NodeId], k: f64, l: f64) -> Verdict {
    let q = NccQuery {
        graph: g,
        partition: f,
        sampling: m,
        k,
        l,
    };
    check_ncc(&q, 16).unwrap().verdict
}

pub fn ncc_k_monotonicity() -> Result<(), String> {
    let s = arb_ncc().prop_flat_map(|t| (Just(t), 1.0..4.0f64));
    run(128, 7, s, |((g, f, m, k, l), factor)| {
        let low = verdict(&g, &f, &m, k, l);
        let high = verdict(&g, &f, &m, k * factor, l);
        check(
            !(low == Verdict::Holds && high != Verdict::Holds),
            format!("holds at K={k} but {high:?} at K={}", k * factor),
        )
    })
}

pub fn ncc_relabel_invariance() -> Result<(), String> {
    let s = arb_ncc().prop_flat_map(|t| {
        let n = t.0.node_count();
        (Just(t), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    });
    run(128, 8, s, |((g, f, m, k, l), perm)| {
        let edges: Vec<(usize, usize)> = g.edges().iter().map(|e| (perm[e.lo], perm[e.hi])).collect();
        let g2 = validate_graph(&edges, g.weights(), g.node_count()).unwrap();
        let mut assignment = vec![0; g.node_count()];
        for v in 0..g.node_count() {
            assignment[perm[v]] = f.cluster_count() - 1 - f.cluster_of(v);
        }
        let f2 = Partition::from_assignment(&assignment).unwrap();
        let m2: Vec<NodeId> = m.iter().map(|&v| perm[v]).collect();
        let a = verdict(&g, &f, &m, k, l);
        let b = verdict(&g2, &f2, &m2, k, l);
        check(a == b, format!("{a:?} vs {b:?} after relabeling"))
    })
}

/// Tiny network Lasso instance: graph, observations, two penalties.
fn arb_lasso() -> impl Strategy<Value = (Graph, Observations, f64, f64)> {
    arb_graph(6, 0.5, 2.0).prop_flat_map(|g| {
        let n = g.node_count();
        (
            Just(g),
            prop::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n.min(3)),
            prop::collection::vec(-3.0..3.0f64, 3),
            0.01..2.0f64,
            0.01..2.0f64,
        )
            .prop_map(|(g, nodes, labels, a, b)| {
                let k = nodes.len();
                let obs = Observations::new(nodes, labels[..k].to_vec()).unwrap();
                (g, obs, a.min(b), a.max(b))
            })
    })
}

pub fn lambda_monotonicity() -> Result<(), String> {
    run(128, 9, arb_lasso(), |(g, obs, lo, hi)| {
        let (_, x_lo) = solve_oracle(&g, &obs, lo).unwrap();
        let (_, x_hi) = solve_oracle(&g, &obs, hi).unwrap();
        let (t_lo, t_hi) = (tv(&g, &x_lo).unwrap(), tv(&g, &x_hi).unwrap());
        check(
            t_hi <= t_lo + 1e-9 * (1.0 + t_lo),
            format!("tv {t_hi} at lambda {hi} exceeds {t_lo} at lambda {lo}"),
        )
    })
}

pub fn solver_scaling() -> Result<(), String> {
    let s = arb_lasso().prop_flat_map(|t| (Just(t), 0.1..10.0f64));
    run(128, 10, s, |((g, obs, lambda, _), a)| {
        let scaled = Observations::new(
            obs.nodes().to_vec(),
            obs.labels().iter().map(|y| a * y).collect(),
        )
        .unwrap();
        let (p, x) = solve_oracle(&g, &obs, lambda).unwrap();
        let (ps, _) = solve_oracle(&g, &scaled, lambda).unwrap();
        check(close(ps, a * p, 1e-9), format!("{ps} vs {}", a * p))?;
        let at = objective(&g, &x.scale(a), &scaled, lambda).unwrap();
        check(close(at, ps, 1e-9), "scaled minimizer is not optimal for scaled labels")
    })
}

pub fn max_flow_min_cut() -> Result<(), String> {
    run(256, 11, arb_network(7), |net| {
        let t = net.node_count() - 1;
        let r = max_flow(&net, 0, t).unwrap();
        let brute = brute_min_cut(&net, 0, t);
        check(r.value == brute, format!("max flow {} vs min cut {brute}", r.value))?;
        check(net.cut_capacity(&r.source_side) == r.value, "returned cut is not minimum")
    })
}

pub fn feasibility_certificates() -> Result<(), String> {
    let q = unit_quantizer();
    run(256, 12, arb_demands(7), move |(g, d)| {
        let excluded = vec![false; g.edge_count()];
        match feasible_flow_units(&g, &excluded, &d, q).unwrap() {
            Feasibility::Feasible(w) => check(
                verify_witness(&g, &excluded, &d, q, &w).is_ok(),
                "witness rejected",
            ),
            Feasibility::Infeasible(c) => check(verify_cut(&g, &excluded, &d, q, &c), "cut rejected"),
        }
    })
}

pub fn feasibility_monotone_in_slack() -> Result<(), String> {
    let q = unit_quantizer();
    let s = arb_demands(7).prop_flat_map(|t| (Just(t), 0i64..4));
    run(256, 13, s, move |((g, d), extra)| {
        let excluded = vec![false; g.edge_count()];
        let more = QuantizedDemands {
            slack_bound: d.slack_bound + extra,
            ..d.clone()
        };
        let a = feasible_flow_units(&g, &excluded, &d, q).unwrap().is_feasible();
        let b = feasible_flow_units(&g, &excluded, &more, q).unwrap().is_feasible();
        check(!a || b, "feasibility lost when the slack bound grew")
    })
}

pub fn feasibility_monotone_in_capacity() -> Result<(), String> {
    let q = unit_quantizer();
    let s = arb_demands(7).prop_flat_map(|t| (Just(t), 1u32..4));
    run(256, 14, s, move |((g, d), factor)| {
        let excluded = vec![false; g.edge_count()];
        let wider = g
            .with_weights(g.weights().iter().map(|w| w * factor as f64).collect())
            .unwrap();
        let a = feasible_flow_units(&g, &excluded, &d, q).unwrap().is_feasible();
        let b = feasible_flow_units(&wider, &excluded, &d, q).unwrap().is_feasible();
        check(!a || b, "feasibility lost when capacities grew")
    })
}

pub type Suite = (&'static str, fn() -> Result<(), String>);

pub fn suites() -> Vec<Suite> {
    vec![
        ("tv homogeneity", tv_homogeneity),
        ("tv triangle inequality", tv_triangle),
        ("tv zero iff component-constant", tv_zero_iff_component_constant),
        ("tv restricted additivity", tv_restricted_additivity),
        ("boundary identity for clustered signals", boundary_identity),
        ("boundary invariant under cluster relabeling", boundary_relabel_invariance),
        ("ncc monotone in K", ncc_k_monotonicity),
        ("ncc invariant under relabeling", ncc_relabel_invariance),
        ("solution tv non-increasing in lambda", lambda_monotonicity),
        ("optimum scales with the labels", solver_scaling),
        ("max flow equals min cut", max_flow_min_cut),
        ("feasibility certificates verify", feasibility_certificates),
        ("feasibility monotone in slack bound", feasibility_monotone_in_slack),
        ("feasibility monotone in capacity", feasibility_monotone_in_capacity),
    ]
}
