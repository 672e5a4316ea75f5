//! Sampling-set construction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{boundary_ids, Graph, GraphError, NodeId, Partition};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("budget {budget} exceeds node count {n}")]
    BudgetExceedsNodes { budget: usize, n: usize },
    #[error("budget must be at least one")]
    ZeroBudget,
    #[error("selection weight factor must be positive, got {0}")]
    InvalidFactor(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Number of nodes to sample, `1 <= m <= N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingBudget(usize);

impl SamplingBudget {
    pub fn new(m: usize, n: usize) -> Result<Self, SamplingError> {
        if m == 0 {
            return Err(SamplingError::ZeroBudget);
        }
        if m > n {
            return Err(SamplingError::BudgetExceedsNodes { budget: m, n });
        }
        Ok(SamplingBudget(m))
    }

    /// `ceil(N / 2)`, at least one.
    pub fn half(n: usize) -> Self {
        SamplingBudget(n.div_ceil(2).max(1))
    }

    pub fn get(self) -> usize {
        self.0
    }

    fn check(self, n: usize) -> Result<usize, SamplingError> {
        SamplingBudget::new(self.0, n).map(SamplingBudget::get)
    }
}

/// Deterministic boundary-first selection.
///
/// Boundary edges are visited by decreasing weight (ties in edge order).
/// For each endpoint `v` of a boundary edge `{i,j}` that does not yet have
/// a selected in-cluster neighbor joined by weight at least
/// `factor * W_ij`, the unselected in-cluster neighbor of `v` with the
/// heaviest connecting edge is selected. Ties go to the candidate with the
/// larger total boundary weight, then to the smaller id.
///
/// Any remaining budget is spread over the clusters: each step serves the
/// cluster with the smallest sampled fraction (ties to the lower cluster
/// index) and takes its unselected node of largest total boundary weight,
/// then largest weighted degree, then smallest id. With a single cluster
/// this is plain descending weighted degree. Returns exactly `budget`
/// distinct nodes, sorted.
pub fn sample_boundary_aware(
    g: &Graph,
    f: &Partition,
    budget: SamplingBudget,
    factor: f64,
) -> Result<Vec<NodeId>, SamplingError> {
    let n = g.node_count();
    let m = budget.check(n)?;
    if !(factor.is_finite() && factor > 0.0) {
        return Err(SamplingError::InvalidFactor(factor));
    }
    let mut ids = boundary_ids(g, f)?;
    ids.sort_by(|&a, &b| g.weight(b).total_cmp(&g.weight(a)).then(a.cmp(&b)));

    let mut crossing = vec![0.0; n];
    for &id in &ids {
        let e = g.edge(id);
        crossing[e.lo] += g.weight(id);
        crossing[e.hi] += g.weight(id);
    }
    let mut selected = vec![false; n];
    let mut count = 0;
    'edges: for id in ids {
        let e = g.edge(id);
        let need = factor * g.weight(id);
        for v in [e.lo, e.hi] {
            if count == m {
                break 'edges;
            }
            let cluster = f.cluster_of(v);
            let in_cluster = || {
                g.neighbors(v)
                    .iter()
                    .filter(move |&&(u, _)| f.cluster_of(u) == cluster)
            };
            let served = in_cluster().any(|&(u, eid)| selected[u] && g.weight(eid) >= need);
            if served {
                continue;
            }
            // neighbors are sorted by id, so the first maximum wins full ties
            let pick = in_cluster()
                .filter(|&&(u, _)| !selected[u])
                .map(|&(u, eid)| (u, (g.weight(eid), crossing[u])))
                .fold(None::<(NodeId, (f64, f64))>, |best, (u, key)| match best {
                    Some((_, k)) if k.0 > key.0 || (k.0 == key.0 && k.1 >= key.1) => best,
                    _ => Some((u, key)),
                });
            if let Some((u, _)) = pick {
                selected[u] = true;
                count += 1;
            }
        }
    }

    // fill: always top up the cluster with the smallest sampled fraction,
    // taking its unselected node closest to the boundary
    let mut taken = vec![0usize; f.cluster_count()];
    for v in (0..n).filter(|&v| selected[v]) {
        taken[f.cluster_of(v)] += 1;
    }
    let mut pools: Vec<Vec<NodeId>> = f
        .clusters()
        .iter()
        .map(|c| {
            let mut pool: Vec<NodeId> = c.iter().copied().filter(|&v| !selected[v]).collect();
            // best candidate last
            pool.sort_by(|&a, &b| {
                crossing[a]
                    .total_cmp(&crossing[b])
                    .then(g.weighted_degree(a).total_cmp(&g.weighted_degree(b)))
                    .then(b.cmp(&a))
            });
            pool
        })
        .collect();
    while count < m {
        let fraction = |c: usize| taken[c] as f64 / f.clusters()[c].len() as f64;
        let c = (0..pools.len())
            .filter(|&c| !pools[c].is_empty())
            .min_by(|&a, &b| fraction(a).total_cmp(&fraction(b)).then(a.cmp(&b)))
            .expect("budget does not exceed the node count");
        let v = pools[c].pop().expect("pool is non-empty");
        selected[v] = true;
        taken[c] += 1;
        count += 1;
    }
    Ok((0..n).filter(|&v| selected[v]).collect())
}

/// `budget` distinct nodes drawn uniformly without replacement, sorted.
pub fn sample_uniform(g: &Graph, budget: SamplingBudget, seed: u64) -> Result<Vec<NodeId>, SamplingError> {
    let n = g.node_count();
    let m = budget.check(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = rand::seq::index::sample(&mut rng, n, m).into_vec();
    nodes.sort_unstable();
    Ok(nodes)
}

/// Copy of `g` in which every non-boundary edge touching a sampled node has
/// weight at least `l` times the largest boundary weight. Other weights are
/// unchanged. With `sampling` from [`sample_boundary_aware`] this typically
/// makes the local sufficient condition hold with parameter `l`.
pub fn reinforce_sampled_edges(
    g: &Graph,
    f: &Partition,
    sampling: &[NodeId],
    l: f64,
) -> Result<Graph, SamplingError> {
    if !(l.is_finite() && l > 0.0) {
        return Err(SamplingError::InvalidFactor(l));
    }
    let n = g.node_count();
    let mut sampled = vec![false; n];
    for &v in sampling {
        if v >= n {
            return Err(GraphError::NodeOutOfRange { node: v, n }.into());
        }
        sampled[v] = true;
    }
    let mut on_boundary = vec![false; g.edge_count()];
    let mut max_w = 0.0f64;
    for id in boundary_ids(g, f)? {
        on_boundary[id] = true;
        max_w = max_w.max(g.weight(id));
    }
    let target = l * max_w;
    let weights = g
        .edges()
        .iter()
        .zip(g.weights())
        .zip(&on_boundary)
        .map(|((e, &w), &b)| {
            if !b && (sampled[e.lo] || sampled[e.hi]) {
                w.max(target)
            } else {
                w
            }
        })
        .collect();
    Ok(g.with_weights(weights)?)
}
