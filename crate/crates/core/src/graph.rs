//! Weighted undirected data graphs, graph signals, partitions and the
//! total variation semi-norm.
//!
//! Nodes are dense integers `0..N`. Edges are stored canonically with the
//! smaller endpoint first and sorted, so an [`EdgeId`] is the position of
//! the pair in lexicographic order. All types here are immutable once
//! built.

use std::collections::HashMap;
use std::ops::Sub;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("self loop at node {0}")]
    SelfLoop(NodeId),
    #[error("edge {{{0},{1}}} has non-positive or non-finite weight {2}")]
    NonPositiveWeight(NodeId, NodeId, f64),
    #[error("duplicate edge {{{0},{1}}}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("edge {{{0},{1}}} is not in the graph")]
    EdgeNotInGraph(NodeId, NodeId),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("expected {expected} cluster coefficients, got {got}")]
    CoefficientCountMismatch { expected: usize, got: usize },
    #[error("signal value at node {0} is not finite")]
    NonFiniteValue(NodeId),
}

/// Unordered node pair stored with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub lo: NodeId,
    pub hi: NodeId,
}

impl Edge {
    /// Canonicalizes `{a, b}`. Does not reject `a == b`; graph validation does.
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Edge { lo: a, hi: b }
        } else {
            Edge { lo: b, hi: a }
        }
    }

    pub fn other(&self, node: NodeId) -> NodeId {
        if node == self.lo {
            self.hi
        } else {
            self.lo
        }
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    weights: Vec<f64>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    index: HashMap<Edge, EdgeId>,
}

/// Graphs are equal when they have the same node count, edges and weights.
impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges && self.weights == other.weights
    }
}

/// Builds a [`Graph`] from raw endpoint pairs and weights, rejecting
/// anything that is not a simple, positively weighted graph on `0..n`.
pub fn validate_graph(
    raw_edges: &[(NodeId, NodeId)],
    raw_weights: &[f64],
    n: usize,
) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    if raw_edges.len() != raw_weights.len() {
        return Err(GraphError::DimensionMismatch {
            what: "edge weights",
            expected: raw_edges.len(),
            got: raw_weights.len(),
        });
    }
    let mut pairs: Vec<(Edge, f64)> = Vec::with_capacity(raw_edges.len());
    for (&(a, b), &w) in raw_edges.iter().zip(raw_weights) {
        for node in [a, b] {
            if node >= n {
                return Err(GraphError::NodeOutOfRange { node, n });
            }
        }
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(GraphError::NonPositiveWeight(a, b, w));
        }
        pairs.push((Edge::new(a, b), w));
    }
    pairs.sort_by_key(|x| x.0);
    for win in pairs.windows(2) {
        if win[0].0 == win[1].0 {
            return Err(GraphError::DuplicateEdge(win[0].0.lo, win[0].0.hi));
        }
    }

    let mut adjacency = vec![Vec::new(); n];
    let mut index = HashMap::with_capacity(pairs.len());
    for (id, (e, _)) in pairs.iter().enumerate() {
        adjacency[e.lo].push((e.hi, id));
        adjacency[e.hi].push((e.lo, id));
        index.insert(*e, id);
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    let (edges, weights) = pairs.into_iter().unzip();
    Ok(Graph {
        n,
        edges,
        weights,
        adjacency,
        index,
    })
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Edge {
        self.edges[id]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, id: EdgeId) -> f64 {
        self.weights[id]
    }

    pub fn edge_id(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.index.get(&Edge::new(a, b)).copied()
    }

    /// Weight of `{a, b}`, or zero when the pair is not an edge.
    pub fn weight_between(&self, a: NodeId, b: NodeId) -> f64 {
        self.edge_id(a, b).map_or(0.0, |id| self.weights[id])
    }

    /// `(neighbor, edge id)` pairs sorted by neighbor.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node].len()
    }

    pub fn weighted_degree(&self, node: NodeId) -> f64 {
        self.adjacency[node]
            .iter()
            .map(|&(_, e)| self.weights[e])
            .sum()
    }

    /// Component label per node, labels assigned in order of smallest member.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Whether the subgraph induced by `nodes` is connected. Empty sets count
    /// as connected.
    pub fn induces_connected(&self, nodes: &[NodeId]) -> bool {
        let Some(&start) = nodes.first() else {
            return true;
        };
        let mut member = vec![false; self.n];
        for &v in nodes {
            member[v] = true;
        }
        let mut seen = vec![false; self.n];
        seen[start] = true;
        let mut stack = vec![start];
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if member[v] && !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == nodes.len()
    }

    /// Copy of the graph with some edge weights replaced.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Graph, GraphError> {
        let pairs: Vec<(NodeId, NodeId)> = self.edges.iter().map(|e| (e.lo, e.hi)).collect();
        validate_graph(&pairs, &weights, self.n)
    }

    fn resolve_edges(&self, set: &[Edge]) -> Result<Vec<EdgeId>, GraphError> {
        set.iter()
            .map(|e| {
                self.edge_id(e.lo, e.hi)
                    .ok_or(GraphError::EdgeNotInGraph(e.lo, e.hi))
            })
            .collect()
    }
}

/// Real value per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSignal(Vec<f64>);

impl GraphSignal {
    pub fn new(values: Vec<f64>) -> Result<Self, GraphError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GraphError::NonFiniteValue(i));
        }
        Ok(GraphSignal(values))
    }

    pub fn constant(n: usize, value: f64) -> Self {
        GraphSignal(vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn scale(&self, c: f64) -> GraphSignal {
        GraphSignal(self.0.iter().map(|v| c * v).collect())
    }

    pub fn max_abs_diff(&self, other: &GraphSignal) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn check_on(&self, g: &Graph) -> Result<(), GraphError> {
        if self.0.len() != g.node_count() {
            return Err(GraphError::DimensionMismatch {
                what: "graph signal",
                expected: g.node_count(),
                got: self.0.len(),
            });
        }
        Ok(())
    }
}

impl std::ops::Index<NodeId> for GraphSignal {
    type Output = f64;
    fn index(&self, i: NodeId) -> &f64 {
        &self.0[i]
    }
}

impl Sub for &GraphSignal {
    type Output = GraphSignal;

    /// Panics if lengths differ.
    fn sub(self, rhs: &GraphSignal) -> GraphSignal {
        assert_eq!(self.0.len(), rhs.0.len(), "signal length mismatch");
        GraphSignal(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl std::ops::Add for &GraphSignal {
    type Output = GraphSignal;

    /// Panics if lengths differ.
    fn add(self, rhs: &GraphSignal) -> GraphSignal {
        assert_eq!(self.0.len(), rhs.0.len(), "signal length mismatch");
        GraphSignal(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

/// Total variation `sum over edges of W_ij |x_j - x_i|`.
pub fn tv(g: &Graph, x: &GraphSignal) -> Result<f64, GraphError> {
    x.check_on(g)?;
    Ok(tv_unchecked(g, x.values()))
}

pub(crate) fn tv_unchecked(g: &Graph, x: &[f64]) -> f64 {
    g.edges
        .iter()
        .zip(&g.weights)
        .map(|(e, w)| w * (x[e.hi] - x[e.lo]).abs())
        .sum()
}

/// Total variation restricted to the edges in `set`.
pub fn tv_restricted(g: &Graph, x: &GraphSignal, set: &[Edge]) -> Result<f64, GraphError> {
    x.check_on(g)?;
    let ids = g.resolve_edges(set)?;
    Ok(tv_over_ids(g, x.values(), &ids))
}

pub(crate) fn tv_over_ids(g: &Graph, x: &[f64], ids: &[EdgeId]) -> f64 {
    ids.iter()
        .map(|&id| {
            let e = g.edges[id];
            g.weights[id] * (x[e.hi] - x[e.lo]).abs()
        })
        .sum()
}

/// Disjoint cover of `0..N` by non-empty clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    clusters: Vec<Vec<NodeId>>,
    assignment: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, clusters: Vec<Vec<NodeId>>) -> Result<Self, GraphError> {
        if clusters.is_empty() {
            return Err(GraphError::InvalidPartition("no clusters".into()));
        }
        let mut assignment = vec![usize::MAX; n];
        let mut clusters = clusters;
        for (c, members) in clusters.iter_mut().enumerate() {
            if members.is_empty() {
                return Err(GraphError::InvalidPartition(format!("cluster {c} is empty")));
            }
            members.sort_unstable();
            for &v in members.iter() {
                if v >= n {
                    return Err(GraphError::NodeOutOfRange { node: v, n });
                }
                if assignment[v] != usize::MAX {
                    return Err(GraphError::InvalidPartition(format!(
                        "node {v} appears in more than one cluster"
                    )));
                }
                assignment[v] = c;
            }
        }
        if let Some(v) = assignment.iter().position(|&c| c == usize::MAX) {
            return Err(GraphError::InvalidPartition(format!(
                "node {v} is not covered"
            )));
        }
        Ok(Partition {
            clusters,
            assignment,
        })
    }

    /// Builds a partition from a cluster index per node. Indices must be
    /// dense: every value in `0..max+1` used at least once.
    pub fn from_assignment(assignment: &[usize]) -> Result<Self, GraphError> {
        let k = assignment.iter().max().map_or(0, |&m| m + 1);
        let mut clusters = vec![Vec::new(); k];
        for (v, &c) in assignment.iter().enumerate() {
            clusters[c].push(v);
        }
        Partition::new(assignment.len(), clusters)
    }

    pub fn single(n: usize) -> Self {
        Partition {
            clusters: vec![(0..n).collect()],
            assignment: vec![0; n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn clusters(&self) -> &[Vec<NodeId>] {
        &self.clusters
    }

    pub fn cluster_of(&self, node: NodeId) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    pub(crate) fn check_on(&self, g: &Graph) -> Result<(), GraphError> {
        if self.node_count() != g.node_count() {
            return Err(GraphError::InvalidPartition(format!(
                "partition covers {} nodes but graph has {}",
                self.node_count(),
                g.node_count()
            )));
        }
        Ok(())
    }
}

/// Ids of the edges joining different clusters, ascending.
pub fn boundary_ids(g: &Graph, f: &Partition) -> Result<Vec<EdgeId>, GraphError> {
    f.check_on(g)?;
    Ok(g.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| f.cluster_of(e.lo) != f.cluster_of(e.hi))
        .map(|(id, _)| id)
        .collect())
}

/// Edges joining different clusters, in canonical order.
pub fn boundary(g: &Graph, f: &Partition) -> Result<Vec<Edge>, GraphError> {
    Ok(boundary_ids(g, f)?.into_iter().map(|id| g.edge(id)).collect())
}

/// Piecewise-constant signal taking `coeffs[c]` on cluster `c`.
pub fn clustered_signal(f: &Partition, coeffs: &[f64]) -> Result<GraphSignal, GraphError> {
    if coeffs.len() != f.cluster_count() {
        return Err(GraphError::CoefficientCountMismatch {
            expected: f.cluster_count(),
            got: coeffs.len(),
        });
    }
    GraphSignal::new(f.assignment.iter().map(|&c| coeffs[c]).collect())
}

/// Edge with a designated direction. Flow on an oriented edge travels from
/// `tail` to `head`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedEdge {
    pub head: NodeId,
    pub tail: NodeId,
    pub weight: f64,
}

/// Assignment of a direction to each edge of a subset of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub arcs: Vec<(EdgeId, OrientedEdge)>,
}

impl Orientation {
    /// Orients `ids[k]` from `lo` to `hi` when bit `k` of `flips` is clear,
    /// and from `hi` to `lo` when it is set. Supports up to 64 edges.
    pub fn from_mask(g: &Graph, ids: &[EdgeId], flips: u64) -> Orientation {
        assert!(ids.len() <= 64, "at most 64 edges per mask");
        let arcs = ids
            .iter()
            .enumerate()
            .map(|(k, &id)| {
                let e = g.edge(id);
                let (tail, head) = if flips >> k & 1 == 0 {
                    (e.lo, e.hi)
                } else {
                    (e.hi, e.lo)
                };
                (
                    id,
                    OrientedEdge {
                        head,
                        tail,
                        weight: g.weight(id),
                    },
                )
            })
            .collect();
        Orientation { arcs }
    }
}
