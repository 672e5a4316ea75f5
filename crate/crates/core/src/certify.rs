//! Recoverability certificates for a sampling set and a partition.
//!
//! The network compatibility condition (NCC) with parameters `K, L` asks
//! that for every orientation of the boundary edges there is a flow which
//! pushes exactly `L * W_e` across each boundary edge `e`, uses every other
//! edge up to its weight in either direction, conserves flow at unsampled
//! nodes and lets each sampled node emit or absorb at most `K`.
//!
//! Boundary edges carry their prescribed `L * W_e` without being bound by
//! their own capacity; capacities only constrain the remaining edges.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{
    feasible_flow_units, CutCertificate, Feasibility, FlowError, FlowWitness, QuantizedDemands,
    Quantizer,
};
use crate::graph::{boundary_ids, tv, Edge, EdgeId, Graph, GraphError, GraphSignal, NodeId, Orientation, Partition};

pub const DEFAULT_MAX_BOUNDARY: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("L must be greater than one, got {0}")]
    LNotGreaterThanOne(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone, Copy)]
pub struct NccQuery<'a> {
    pub graph: &'a Graph,
    pub partition: &'a Partition,
    pub sampling: &'a [NodeId],
    pub k: f64,
    pub l: f64,
}

impl NccQuery<'_> {
    fn validate(&self) -> Result<(), CertifyError> {
        let bad = |m: String| Err(CertifyError::InvalidQuery(m));
        if self.sampling.is_empty() {
            return bad("sampling set is empty".into());
        }
        let n = self.graph.node_count();
        let mut seen = vec![false; n];
        for &i in self.sampling {
            if i >= n {
                return bad(format!("sampled node {i} out of range"));
            }
            if std::mem::replace(&mut seen[i], true) {
                return bad(format!("sampled node {i} listed twice"));
            }
        }
        for (name, v) in [("K", self.k), ("L", self.l)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.partition.node_count() != n {
            return bad("partition does not match graph".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Indeterminate,
}

/// Feasible flow for one boundary orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationWitness {
    /// Bit `k` set means boundary edge `k` points from `hi` to `lo`.
    pub mask: u64,
    pub flows: FlowWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub mask: u64,
    pub orientation: Orientation,
    pub cut: CutCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NccCertificate {
    pub verdict: Verdict,
    pub k: f64,
    pub l: f64,
    /// Flow units per unit of weight.
    pub scale: f64,
    pub boundary: Vec<Edge>,
    /// Prescribed flow `L * W_e` on each boundary edge, in units.
    pub boundary_units: Vec<i64>,
    pub witnesses: Vec<OrientationWitness>,
    pub counterexample: Option<Counterexample>,
    pub reason: Option<String>,
}

impl NccCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Node injections for one boundary orientation: the net amount each node
/// must push through non-boundary edges so that total conservation holds.
fn orientation_injections(
    g: &Graph,
    ids: &[EdgeId],
    units: &[i64],
    mask: u64,
) -> Vec<i64> {
    let mut b = vec![0i64; g.node_count()];
    for (k, (&id, &amount)) in ids.iter().zip(units).enumerate() {
        let e = g.edge(id);
        let (tail, head) = if mask >> k & 1 == 0 { (e.lo, e.hi) } else { (e.hi, e.lo) };
        // tail already sends `amount` out over the boundary, so it must
        // take the same amount in through the rest of the graph
        b[tail] -= amount;
        b[head] += amount;
    }
    b
}

/// Decides the NCC by enumerating all `2^|boundary|` orientations. With more
/// than `max_boundary` boundary edges the verdict is `Indeterminate`.
pub fn check_ncc(q: &NccQuery, max_boundary: usize) -> Result<NccCertificate, CertifyError> {
    check_ncc_with(q, max_boundary, Quantizer::default())
}

pub fn check_ncc_with(
    q: &NccQuery,
    max_boundary: usize,
    quant: Quantizer,
) -> Result<NccCertificate, CertifyError> {
    q.validate()?;
    let g = q.graph;
    let ids = boundary_ids(g, q.partition)?;
    let units: Vec<i64> = ids.iter().map(|&id| quant.units(q.l * g.weight(id))).collect();
    let mut cert = NccCertificate {
        verdict: Verdict::Holds,
        k: q.k,
        l: q.l,
        scale: quant.scale,
        boundary: ids.iter().map(|&id| g.edge(id)).collect(),
        boundary_units: units.clone(),
        witnesses: Vec::new(),
        counterexample: None,
        reason: None,
    };
    let cap = max_boundary.min(63);
    if ids.len() > cap {
        cert.verdict = Verdict::Indeterminate;
        cert.reason = Some(format!(
            "boundary has {} edges, enumeration limited to {cap}",
            ids.len()
        ));
        return Ok(cert);
    }

    let mut excluded = vec![false; g.edge_count()];
    for &id in &ids {
        excluded[id] = true;
    }
    let mut slack = vec![false; g.node_count()];
    for &i in q.sampling {
        slack[i] = true;
    }
    let slack_bound = quant.units(q.k);

    let outcomes: Vec<Feasibility> = (0..1u64 << ids.len())
        .into_par_iter()
        .map(|mask| {
            let demands = QuantizedDemands {
                injections: orientation_injections(g, &ids, &units, mask),
                slack: slack.clone(),
                slack_bound,
            };
            feasible_flow_units(g, &excluded, &demands, quant)
        })
        .collect::<Result<_, _>>()?;

    for (mask, outcome) in outcomes.into_iter().enumerate() {
        let mask = mask as u64;
        match outcome {
            Feasibility::Feasible(flows) => cert.witnesses.push(OrientationWitness { mask, flows }),
            Feasibility::Infeasible(cut) => {
                cert.verdict = Verdict::Fails;
                cert.witnesses.clear();
                cert.counterexample = Some(Counterexample {
                    mask,
                    orientation: Orientation::from_mask(g, &ids, mask),
                    cut,
                });
                break;
            }
        }
    }
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("certificate verdict is not `holds`")]
    NotHolding,
    #[error("expected {expected} witnesses, found {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("boundary or prescribed flows differ from the query")]
    BoundaryMismatch,
    #[error("witness for orientation {mask:#b}: {violation}")]
    Violation {
        mask: u64,
        violation: crate::flow::FlowViolation,
    },
}

/// Re-verifies every witness of a `holds` certificate against the query,
/// rebuilding boundary flows and demands from scratch.
pub fn verify_certificate(q: &NccQuery, cert: &NccCertificate) -> Result<(), WitnessError> {
    if cert.verdict != Verdict::Holds {
        return Err(WitnessError::NotHolding);
    }
    let g = q.graph;
    let quant = Quantizer::new(cert.scale);
    let ids = boundary_ids(g, q.partition).map_err(|_| WitnessError::BoundaryMismatch)?;
    let units: Vec<i64> = ids.iter().map(|&id| quant.units(q.l * g.weight(id))).collect();
    let edges: Vec<Edge> = ids.iter().map(|&id| g.edge(id)).collect();
    if edges != cert.boundary || units != cert.boundary_units {
        return Err(WitnessError::BoundaryMismatch);
    }
    let expected = 1usize << ids.len();
    if cert.witnesses.len() != expected {
        return Err(WitnessError::WrongCount {
            expected,
            found: cert.witnesses.len(),
        });
    }
    let mut excluded = vec![false; g.edge_count()];
    for &id in &ids {
        excluded[id] = true;
    }
    let mut slack = vec![false; g.node_count()];
    for &i in q.sampling {
        slack[i] = true;
    }
    for (k, w) in cert.witnesses.iter().enumerate() {
        if w.mask != k as u64 {
            return Err(WitnessError::WrongCount {
                expected,
                found: cert.witnesses.len(),
            });
        }
        let demands = QuantizedDemands {
            injections: orientation_injections(g, &ids, &units, w.mask),
            slack: slack.clone(),
            slack_bound: quant.units(q.k),
        };
        crate::flow::verify_witness(g, &excluded, &demands, quant, &w.flows)
            .map_err(|violation| WitnessError::Violation { mask: w.mask, violation })?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub satisfied: bool,
    /// `L` times the largest boundary weight; zero for an empty boundary.
    pub k: Option<f64>,
    /// Boundary edges lacking a heavy enough sampled neighbor on some side.
    pub violations: Vec<Edge>,
    /// Set when the boundary is empty and the condition holds vacuously.
    pub degenerate: bool,
}

/// Whether `node` has a sampled neighbor in its own cluster joined by an
/// edge of weight at least `need`.
fn has_heavy_sampled_neighbor(
    g: &Graph,
    f: &Partition,
    sampled: &[bool],
    node: NodeId,
    need: f64,
) -> bool {
    g.neighbors(node).iter().any(|&(m, e)| {
        sampled[m] && f.cluster_of(m) == f.cluster_of(node) && g.weight(e) >= need
    })
}

/// Checks the local sufficient condition: every boundary edge `{i,j}` has a
/// sampled in-cluster neighbor of `i` and one of `j`, each joined by an
/// edge of weight at least `L * W_ij`.
pub fn check_lemma1(
    g: &Graph,
    f: &Partition,
    sampling: &[NodeId],
    l: f64,
) -> Result<Lemma1Report, CertifyError> {
    if !(l.is_finite() && l > 0.0) {
        return Err(CertifyError::InvalidQuery(format!("L must be positive, got {l}")));
    }
    let ids = boundary_ids(g, f)?;
    let mut sampled = vec![false; g.node_count()];
    for &i in sampling {
        if i >= g.node_count() {
            return Err(GraphError::NodeOutOfRange { node: i, n: g.node_count() }.into());
        }
        sampled[i] = true;
    }
    let violations: Vec<Edge> = ids
        .iter()
        .filter(|&&id| {
            let e = g.edge(id);
            let need = l * g.weight(id);
            !(has_heavy_sampled_neighbor(g, f, &sampled, e.lo, need)
                && has_heavy_sampled_neighbor(g, f, &sampled, e.hi, need))
        })
        .map(|&id| g.edge(id))
        .collect();
    let satisfied = violations.is_empty();
    let k = satisfied.then(|| l * ids.iter().map(|&id| g.weight(id)).fold(0.0, f64::max));
    Ok(Lemma1Report {
        satisfied,
        k,
        violations,
        degenerate: ids.is_empty(),
    })
}

/// `(K + 4/(L-1)) * eps_l1`, the TV error bound for a certified pair.
pub fn theorem1_bound(k: f64, l: f64, eps_l1: f64) -> Result<f64, CertifyError> {
    if l.is_nan() || l <= 1.0 {
        return Err(CertifyError::LNotGreaterThanOne(l));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(CertifyError::InvalidQuery(format!("K must be positive, got {k}")));
    }
    if !(eps_l1.is_finite() && eps_l1 >= 0.0) {
        return Err(CertifyError::InvalidQuery("noise l1 norm must be non-negative".into()));
    }
    Ok((k + 4.0 / (l - 1.0)) * eps_l1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub tv_error: f64,
    pub bound: f64,
    pub noise_l1: f64,
    pub tolerance: f64,
    pub holds: bool,
    /// `bound - tv_error`; negative when violated.
    pub slack: f64,
}

/// Compares `tv(x_hat - x_true)` with [`theorem1_bound`].
pub fn verify_theorem1(
    g: &Graph,
    k: f64,
    l: f64,
    x_true: &GraphSignal,
    x_hat: &GraphSignal,
    noise_l1: f64,
    tolerance: f64,
) -> Result<Theorem1Report, CertifyError> {
    let bound = theorem1_bound(k, l, noise_l1)?;
    if x_true.len() != x_hat.len() {
        return Err(GraphError::DimensionMismatch {
            what: "recovered signal",
            expected: x_true.len(),
            got: x_hat.len(),
        }
        .into());
    }
    let tv_error = tv(g, &(x_hat - x_true))?;
    Ok(Theorem1Report {
        tv_error,
        bound,
        noise_l1,
        tolerance,
        holds: tv_error <= bound + tolerance,
        slack: bound - tv_error,
    })
}

/// Two-cluster fixture: clusters `{m, i}` and `{n, j}` with nodes numbered
/// `m = 0, i = 1, j = 2, n = 3`, edges `{m,i}` and `{n,j}` of weight 4, the
/// single boundary edge `{i,j}` of weight 1, and sampling set `{m, n}`.
pub fn two_cluster_fixture() -> (Graph, Partition, Vec<NodeId>) {
    let g = crate::graph::validate_graph(&[(0, 1), (1, 2), (2, 3)], &[4.0, 1.0, 4.0], 4)
        .expect("fixture graph is valid");
    let f = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).expect("fixture partition is valid");
    (g, f, vec![0, 3])
}
