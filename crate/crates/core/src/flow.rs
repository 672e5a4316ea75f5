//! Maximum flow and feasibility of flows with node demands.
//!
//! All flow arithmetic is exact over `i64` units. Real capacities and
//! demands are mapped to units by a [`Quantizer`] (default 10^6 units per
//! unit of weight) before any augmenting-path work happens.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, EdgeId, Graph, GraphError, NodeId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("node {node} out of range for network with {n} nodes")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("source and sink coincide")]
    SourceIsSink,
    #[error("arc {0} has negative capacity")]
    NegativeCapacity(usize),
    #[error("invalid demand spec: {0}")]
    InvalidDemandSpec(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Fixed-point conversion between reals and flow units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub scale: f64,
}

impl Default for Quantizer {
    fn default() -> Self {
        Quantizer { scale: 1e6 }
    }
}

impl Quantizer {
    pub fn new(scale: f64) -> Self {
        assert!(scale.is_finite() && scale > 0.0, "scale must be positive");
        Quantizer { scale }
    }

    pub fn units(&self, value: f64) -> i64 {
        (value * self.scale).round() as i64
    }

    pub fn real(&self, units: i64) -> f64 {
        units as f64 / self.scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub from: NodeId,
    pub to: NodeId,
    pub capacity: i64,
}

/// Directed network with integer capacities. Parallel and antiparallel
/// arcs are allowed.
#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    n: usize,
    arcs: Vec<Arc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxFlow {
    pub value: i64,
    /// Flow per arc, in insertion order.
    pub flows: Vec<i64>,
    /// Nodes reachable from the source in the final residual network.
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            n,
            arcs: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn add_arc(&mut self, from: NodeId, to: NodeId, capacity: i64) -> Result<usize, FlowError> {
        for node in [from, to] {
            if node >= self.n {
                return Err(FlowError::NodeOutOfRange { node, n: self.n });
            }
        }
        if capacity < 0 {
            return Err(FlowError::NegativeCapacity(self.arcs.len()));
        }
        self.arcs.push(Arc { from, to, capacity });
        Ok(self.arcs.len() - 1)
    }

    /// Sum of capacities of arcs leaving `side` (a node mask).
    pub fn cut_capacity(&self, side: &[bool]) -> i64 {
        self.arcs
            .iter()
            .filter(|a| side[a.from] && !side[a.to])
            .map(|a| a.capacity)
            .sum()
    }
}

/// Maximum `s`-`t` flow by Dinic's algorithm.
pub fn max_flow(net: &FlowNetwork, s: NodeId, t: NodeId) -> Result<MaxFlow, FlowError> {
    for node in [s, t] {
        if node >= net.n {
            return Err(FlowError::NodeOutOfRange { node, n: net.n });
        }
    }
    if s == t {
        return Err(FlowError::SourceIsSink);
    }
    let mut dinic = Dinic::new(net);
    let value = dinic.run(s, t);
    let flows = net
        .arcs
        .iter()
        .enumerate()
        .map(|(k, a)| a.capacity - dinic.residual[2 * k])
        .collect();
    let source_side = dinic.reachable(s);
    Ok(MaxFlow {
        value,
        flows,
        source_side,
    })
}

struct Dinic {
    // arc 2k is the forward copy of user arc k, 2k+1 its reverse
    head: Vec<NodeId>,
    residual: Vec<i64>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    cursor: Vec<usize>,
}

impl Dinic {
    fn new(net: &FlowNetwork) -> Self {
        let mut head = Vec::with_capacity(2 * net.arcs.len());
        let mut residual = Vec::with_capacity(2 * net.arcs.len());
        let mut adj = vec![Vec::new(); net.n];
        for (k, a) in net.arcs.iter().enumerate() {
            head.push(a.to);
            residual.push(a.capacity);
            head.push(a.from);
            residual.push(0);
            adj[a.from].push(2 * k);
            adj[a.to].push(2 * k + 1);
        }
        Dinic {
            head,
            residual,
            adj,
            level: vec![-1; net.n],
            cursor: vec![0; net.n],
        }
    }

    fn tail(&self, arc: usize) -> NodeId {
        self.head[arc ^ 1]
    }

    fn bfs(&mut self, s: NodeId, t: NodeId) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.head[a];
                if self.residual[a] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    /// Finds one augmenting path in the level graph and pushes its bottleneck.
    fn augment(&mut self, s: NodeId, t: NodeId) -> i64 {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let push = path.iter().map(|&a| self.residual[a]).min().unwrap_or(0);
                for &a in &path {
                    self.residual[a] -= push;
                    self.residual[a ^ 1] += push;
                }
                return push;
            }
            let mut advanced = false;
            while self.cursor[u] < self.adj[u].len() {
                let a = self.adj[u][self.cursor[u]];
                let v = self.head[a];
                if self.residual[a] > 0 && self.level[v] == self.level[u] + 1 {
                    path.push(a);
                    u = v;
                    advanced = true;
                    break;
                }
                self.cursor[u] += 1;
            }
            if !advanced {
                // dead end
                self.level[u] = -1;
                match path.pop() {
                    None => return 0,
                    Some(a) => {
                        u = self.tail(a);
                        self.cursor[u] += 1;
                    }
                }
            }
        }
    }

    fn run(&mut self, s: NodeId, t: NodeId) -> i64 {
        let mut total = 0;
        while self.bfs(s, t) {
            self.cursor.iter_mut().for_each(|c| *c = 0);
            loop {
                let pushed = self.augment(s, t);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    fn reachable(&self, s: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &a in &self.adj[u] {
                let v = self.head[a];
                if self.residual[a] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// Node demands for [`feasible_flow`]. A positive injection means the node
/// must send out that much net flow. Slack nodes may additionally deviate
/// from their injection by any amount in `[-slack_bound, slack_bound]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandSpec {
    pub injections: Vec<f64>,
    pub slack_nodes: Vec<NodeId>,
    pub slack_bound: f64,
}

/// [`DemandSpec`] expressed in flow units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantizedDemands {
    pub injections: Vec<i64>,
    pub slack: Vec<bool>,
    pub slack_bound: i64,
}

impl DemandSpec {
    pub fn quantize(&self, n: usize, q: Quantizer) -> Result<QuantizedDemands, FlowError> {
        if self.injections.len() != n {
            return Err(FlowError::InvalidDemandSpec(format!(
                "{} injections for {n} nodes",
                self.injections.len()
            )));
        }
        if self.injections.iter().any(|b| !b.is_finite()) {
            return Err(FlowError::InvalidDemandSpec("non-finite injection".into()));
        }
        if !(self.slack_bound.is_finite() && self.slack_bound >= 0.0) {
            return Err(FlowError::InvalidDemandSpec(
                "slack bound must be finite and non-negative".into(),
            ));
        }
        let mut slack = vec![false; n];
        for &i in &self.slack_nodes {
            if i >= n {
                return Err(FlowError::NodeOutOfRange { node: i, n });
            }
            slack[i] = true;
        }
        Ok(QuantizedDemands {
            injections: self.injections.iter().map(|&b| q.units(b)).collect(),
            slack,
            slack_bound: q.units(self.slack_bound),
        })
    }
}

/// Net flow on one undirected edge, from `tail` to `head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeFlow {
    pub edge: EdgeId,
    pub tail: NodeId,
    pub head: NodeId,
    pub units: i64,
}

/// Feasible flow found by [`feasible_flow`]. Edges not listed carry nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowWitness {
    pub flows: Vec<EdgeFlow>,
    /// `(node, deviation)` for slack nodes with a non-zero deviation from
    /// their fixed injection, in units.
    pub slack_used: Vec<(NodeId, i64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutKind {
    /// The set must emit at least `required` net units but its boundary
    /// edges carry at most `capacity`.
    Surplus,
    /// The set must absorb at least `required` net units but its boundary
    /// edges carry at most `capacity`.
    Deficit,
}

/// Node set whose demands cannot cross its boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutCertificate {
    pub kind: CutKind,
    pub nodes: Vec<NodeId>,
    pub required: i64,
    pub capacity: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Feasibility {
    Feasible(FlowWitness),
    Infeasible(CutCertificate),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

fn resolve(g: &Graph, excluded: &[Edge]) -> Result<Vec<bool>, FlowError> {
    let mut mask = vec![false; g.edge_count()];
    for e in excluded {
        let id = g
            .edge_id(e.lo, e.hi)
            .ok_or(GraphError::EdgeNotInGraph(e.lo, e.hi))?;
        mask[id] = true;
    }
    Ok(mask)
}

/// Decides whether `g` without `excluded` carries a flow meeting `demands`,
/// where every remaining edge may be used in either direction up to its
/// weight.
pub fn feasible_flow(
    g: &Graph,
    excluded: &[Edge],
    demands: &DemandSpec,
    q: Quantizer,
) -> Result<Feasibility, FlowError> {
    let mask = resolve(g, excluded)?;
    let d = demands.quantize(g.node_count(), q)?;
    feasible_flow_units(g, &mask, &d, q)
}

/// Unit-level form of [`feasible_flow`]; `excluded[e]` marks removed edges.
///
/// Each usable edge becomes two antiparallel arcs of capacity `W`. Slack
/// nodes connect to a hub node in both directions with capacity
/// `slack_bound`; the hub absorbs the total injection imbalance. The
/// resulting fixed-demand problem is solved by one max flow from a super
/// source to a super sink.
pub fn feasible_flow_units(
    g: &Graph,
    excluded: &[bool],
    d: &QuantizedDemands,
    q: Quantizer,
) -> Result<Feasibility, FlowError> {
    let n = g.node_count();
    if d.injections.len() != n || d.slack.len() != n || excluded.len() != g.edge_count() {
        return Err(FlowError::InvalidDemandSpec("dimension mismatch".into()));
    }
    if d.slack_bound < 0 {
        return Err(FlowError::InvalidDemandSpec("negative slack bound".into()));
    }
    let hub = n;
    let source = n + 1;
    let sink = n + 2;
    let mut net = FlowNetwork::new(n + 3);

    let mut edge_arcs = Vec::new();
    for (id, e) in g.edges().iter().enumerate() {
        if excluded[id] {
            continue;
        }
        let cap = q.units(g.weight(id));
        let fwd = net.add_arc(e.lo, e.hi, cap)?;
        let back = net.add_arc(e.hi, e.lo, cap)?;
        edge_arcs.push((id, fwd, back));
    }
    let mut slack_arcs = Vec::new();
    for i in (0..n).filter(|&i| d.slack[i]) {
        let into = net.add_arc(hub, i, d.slack_bound)?;
        let out = net.add_arc(i, hub, d.slack_bound)?;
        slack_arcs.push((i, into, out));
    }
    let hub_injection = -d.injections.iter().sum::<i64>();
    let mut required = 0;
    for (node, &b) in d.injections.iter().chain([&hub_injection]).enumerate() {
        if b > 0 {
            net.add_arc(source, node, b)?;
            required += b;
        } else if b < 0 {
            net.add_arc(node, sink, -b)?;
        }
    }

    let result = max_flow(&net, source, sink)?;
    if result.value == required {
        let flows = edge_arcs
            .iter()
            .filter_map(|&(id, fwd, back)| {
                let e = g.edge(id);
                let net_flow = result.flows[fwd] - result.flows[back];
                match net_flow.cmp(&0) {
                    std::cmp::Ordering::Greater => Some(EdgeFlow {
                        edge: id,
                        tail: e.lo,
                        head: e.hi,
                        units: net_flow,
                    }),
                    std::cmp::Ordering::Less => Some(EdgeFlow {
                        edge: id,
                        tail: e.hi,
                        head: e.lo,
                        units: -net_flow,
                    }),
                    std::cmp::Ordering::Equal => None,
                }
            })
            .collect();
        let slack_used = slack_arcs
            .iter()
            .filter_map(|&(i, into, out)| {
                // hub -> i lets i send more than its injection
                let dev = result.flows[into] - result.flows[out];
                (dev != 0).then_some((i, dev))
            })
            .collect();
        return Ok(Feasibility::Feasible(FlowWitness { flows, slack_used }));
    }

    let side = &result.source_side;
    let cert = if side[hub] {
        // the complement cannot absorb what it must
        let nodes: Vec<NodeId> = (0..n).filter(|&i| !side[i]).collect();
        let need = -nodes
            .iter()
            .map(|&i| d.injections[i] + if d.slack[i] { d.slack_bound } else { 0 })
            .sum::<i64>();
        CutCertificate {
            kind: CutKind::Deficit,
            capacity: crossing_capacity(g, excluded, &nodes, q),
            required: need,
            nodes,
        }
    } else {
        let nodes: Vec<NodeId> = (0..n).filter(|&i| side[i]).collect();
        let need = nodes
            .iter()
            .map(|&i| d.injections[i] - if d.slack[i] { d.slack_bound } else { 0 })
            .sum::<i64>();
        CutCertificate {
            kind: CutKind::Surplus,
            capacity: crossing_capacity(g, excluded, &nodes, q),
            required: need,
            nodes,
        }
    };
    debug_assert!(cert.required > cert.capacity, "{cert:?}");
    Ok(Feasibility::Infeasible(cert))
}

fn crossing_capacity(g: &Graph, excluded: &[bool], nodes: &[NodeId], q: Quantizer) -> i64 {
    let mut inside = vec![false; g.node_count()];
    for &i in nodes {
        inside[i] = true;
    }
    g.edges()
        .iter()
        .enumerate()
        .filter(|&(id, e)| !excluded[id] && inside[e.lo] != inside[e.hi])
        .map(|(id, _)| q.units(g.weight(id)))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowViolation {
    #[error("edge {0} is excluded but carries flow")]
    ExcludedEdgeUsed(EdgeId),
    #[error("edge {edge} carries {units} units, capacity {capacity}")]
    OverCapacity {
        edge: EdgeId,
        units: i64,
        capacity: i64,
    },
    #[error("flow record for edge {0} is malformed")]
    Malformed(EdgeId),
    #[error("node {node}: net outflow {actual}, allowed [{lo}, {hi}]")]
    Conservation {
        node: NodeId,
        actual: i64,
        lo: i64,
        hi: i64,
    },
}

/// Re-checks a witness against capacities, exclusions and demands without
/// using any max-flow machinery.
pub fn verify_witness(
    g: &Graph,
    excluded: &[bool],
    d: &QuantizedDemands,
    q: Quantizer,
    witness: &FlowWitness,
) -> Result<(), FlowViolation> {
    let mut seen = vec![false; g.edge_count()];
    let mut outflow = vec![0i64; g.node_count()];
    for f in &witness.flows {
        let Some(&e) = g.edges().get(f.edge) else {
            return Err(FlowViolation::Malformed(f.edge));
        };
        if Edge::new(f.tail, f.head) != e || f.tail == f.head || f.units < 0 || seen[f.edge] {
            return Err(FlowViolation::Malformed(f.edge));
        }
        seen[f.edge] = true;
        if excluded[f.edge] && f.units != 0 {
            return Err(FlowViolation::ExcludedEdgeUsed(f.edge));
        }
        let capacity = q.units(g.weight(f.edge));
        if f.units > capacity {
            return Err(FlowViolation::OverCapacity {
                edge: f.edge,
                units: f.units,
                capacity,
            });
        }
        outflow[f.tail] += f.units;
        outflow[f.head] -= f.units;
    }
    for (node, &actual) in outflow.iter().enumerate() {
        let b = d.injections[node];
        let (lo, hi) = if d.slack[node] {
            (b - d.slack_bound, b + d.slack_bound)
        } else {
            (b, b)
        };
        if actual < lo || actual > hi {
            return Err(FlowViolation::Conservation {
                node,
                actual,
                lo,
                hi,
            });
        }
    }
    Ok(())
}

/// Re-checks an infeasibility certificate: recomputes the set's required
/// net transfer and its boundary capacity from scratch.
pub fn verify_cut(
    g: &Graph,
    excluded: &[bool],
    d: &QuantizedDemands,
    q: Quantizer,
    cert: &CutCertificate,
) -> bool {
    let mut inside = vec![false; g.node_count()];
    for &i in &cert.nodes {
        if i >= g.node_count() {
            return false;
        }
        inside[i] = true;
    }
    let mut capacity = 0;
    for (id, e) in g.edges().iter().enumerate() {
        if !excluded[id] && inside[e.lo] != inside[e.hi] {
            capacity += q.units(g.weight(id));
        }
    }
    let slack = |i: NodeId| if d.slack[i] { d.slack_bound } else { 0 };
    let required: i64 = match cert.kind {
        CutKind::Surplus => cert.nodes.iter().map(|&i| d.injections[i] - slack(i)).sum(),
        CutKind::Deficit => -cert.nodes.iter().map(|&i| d.injections[i] + slack(i)).sum::<i64>(),
    };
    required == cert.required && capacity == cert.capacity && required > capacity
}
