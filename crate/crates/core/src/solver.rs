//! Network Lasso with absolute empirical loss:
//!
//! ```text
//! minimize  sum_{i in M} |x_i - y_i|  +  lambda * sum_{{i,j} in E} W_ij |x_i - x_j|
//! ```
//!
//! solved by consensus ADMM with one copy of each endpoint value per edge,
//! plus a brute-force oracle for tiny instances.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{tv_unchecked, Graph, GraphError, GraphSignal, NodeId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("invalid observations: {0}")]
    InvalidObservations(String),
    #[error("oracle limited to {max_nodes} nodes and {max_samples} samples")]
    InstanceTooLarge { max_nodes: usize, max_samples: usize },
    #[error("ADMM stopped after {} iterations without meeting tolerances", .0.iterations)]
    NonConvergence(Box<SolverResult>),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Labels observed on a sampling set, with the realized noise when known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observations {
    nodes: Vec<NodeId>,
    labels: Vec<f64>,
    noise: Option<Vec<f64>>,
}

impl Observations {
    /// `nodes` are sorted on construction; labels follow their nodes.
    pub fn new(nodes: Vec<NodeId>, labels: Vec<f64>) -> Result<Self, SolverError> {
        Self::build(nodes, labels, None)
    }

    pub fn with_noise(
        nodes: Vec<NodeId>,
        labels: Vec<f64>,
        noise: Vec<f64>,
    ) -> Result<Self, SolverError> {
        Self::build(nodes, labels, Some(noise))
    }

    fn build(
        nodes: Vec<NodeId>,
        labels: Vec<f64>,
        noise: Option<Vec<f64>>,
    ) -> Result<Self, SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidObservations(m.to_string()));
        if nodes.len() != labels.len() || noise.as_ref().is_some_and(|e| e.len() != nodes.len()) {
            return bad("nodes, labels and noise must have equal length");
        }
        if labels.iter().chain(noise.iter().flatten()).any(|v| !v.is_finite()) {
            return bad("labels and noise must be finite");
        }
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by_key(|&k| nodes[k]);
        if order.windows(2).any(|w| nodes[w[0]] == nodes[w[1]]) {
            return bad("node sampled twice");
        }
        Ok(Observations {
            nodes: order.iter().map(|&k| nodes[k]).collect(),
            labels: order.iter().map(|&k| labels[k]).collect(),
            noise: noise.map(|e| order.iter().map(|&k| e[k]).collect()),
        })
    }

    /// Noiseless observations of `x` on `nodes`.
    pub fn exact(x: &GraphSignal, nodes: &[NodeId]) -> Result<Self, SolverError> {
        if let Some(&bad) = nodes.iter().find(|&&i| i >= x.len()) {
            return Err(GraphError::NodeOutOfRange { node: bad, n: x.len() }.into());
        }
        let labels = nodes.iter().map(|&i| x[i]).collect();
        Self::with_noise(nodes.to_vec(), labels, vec![0.0; nodes.len()])
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn noise(&self) -> Option<&[f64]> {
        self.noise.as_deref()
    }

    /// `sum |e_i|` over the sampling set, when noise is known.
    pub fn noise_l1(&self) -> Option<f64> {
        self.noise.as_ref().map(|e| e.iter().map(|v| v.abs()).sum())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn check_on(&self, g: &Graph) -> Result<(), SolverError> {
        if let Some(&bad) = self.nodes.iter().find(|&&i| i >= g.node_count()) {
            return Err(GraphError::NodeOutOfRange {
                node: bad,
                n: g.node_count(),
            }
            .into());
        }
        Ok(())
    }
}

/// `sum_{i in M} |x_i - y_i|`. Panics if an observed node is outside `x`.
pub fn empirical_error(x: &GraphSignal, obs: &Observations) -> f64 {
    empirical_error_slice(x.values(), obs)
}

fn empirical_error_slice(x: &[f64], obs: &Observations) -> f64 {
    obs.nodes
        .iter()
        .zip(&obs.labels)
        .map(|(&i, y)| (x[i] - y).abs())
        .sum()
}

/// Empirical error plus `lambda` times the total variation.
pub fn objective(g: &Graph, x: &GraphSignal, obs: &Observations, lambda: f64) -> Result<f64, SolverError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(SolverError::InvalidConfig("lambda must be non-negative".into()));
    }
    obs.check_on(g)?;
    Ok(empirical_error(x, obs) + lambda * crate::graph::tv(g, x)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// x, z and u start at zero.
    Zero,
    /// x and z start at the median observed label, u at zero.
    MedianLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub lambda: f64,
    pub rho: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iters: usize,
    pub init: Init,
    /// Keep per-iteration residuals in [`SolverResult::trace`].
    pub record_trace: bool,
    /// Snap the final iterate onto the observed label values when that does
    /// not increase the objective.
    pub polish: bool,
}

impl SolverConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        SolverConfig {
            lambda,
            rho: 1.0,
            eps_abs: 1e-6,
            eps_rel: 1e-5,
            max_iters: 100_000,
            init: Init::Zero,
            record_trace: false,
            polish: true,
        }
    }

    /// `lambda = 1/K` for a compatibility certificate with slack bound `K`.
    pub fn for_certificate(k: f64) -> Result<Self, SolverError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(SolverError::InvalidConfig("K must be positive".into()));
        }
        Ok(Self::with_lambda(1.0 / k))
    }

    fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(m.to_string()));
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad("lambda must be finite and non-negative");
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return bad("rho must be positive");
        }
        if !(self.eps_abs > 0.0 && self.eps_rel > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iteration: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub x_hat: GraphSignal,
    pub objective: f64,
    pub empirical_error: f64,
    pub tv: f64,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<IterRecord>>,
}

impl SolverResult {
    fn evaluate(g: &Graph, obs: &Observations, lambda: f64, x: Vec<f64>) -> Self {
        let empirical_error = empirical_error_slice(&x, obs);
        let tv = tv_unchecked(g, &x);
        SolverResult {
            objective: empirical_error + lambda * tv,
            empirical_error,
            tv,
            x_hat: GraphSignal::new(x).expect("ADMM iterates stay finite"),
            iterations: 0,
            converged: true,
            primal_residual: 0.0,
            dual_residual: 0.0,
            trace: None,
        }
    }

    /// Turns an unconverged result into [`SolverError::NonConvergence`].
    pub fn require_converged(self) -> Result<Self, SolverError> {
        if self.converged {
            Ok(self)
        } else {
            Err(SolverError::NonConvergence(Box::new(self)))
        }
    }
}

/// Some minimizer takes all its values among the observed labels, so
/// rounding a near-optimal iterate to the closest label often lands on an
/// exact minimizer. Returns the rounded signal only if its objective is no
/// larger.
fn polish(g: &Graph, obs: &Observations, lambda: f64, x: &[f64]) -> Option<Vec<f64>> {
    let mut levels = obs.labels.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if levels.is_empty() {
        return None;
    }
    let snapped: Vec<f64> = x
        .iter()
        .map(|&v| {
            let k = levels.partition_point(|&l| l < v);
            let below = levels.get(k.wrapping_sub(1)).copied();
            let above = levels.get(k).copied();
            match (below, above) {
                (Some(b), Some(a)) => if v - b <= a - v { b } else { a },
                (Some(b), None) => b,
                (None, Some(a)) => a,
                (None, None) => unreachable!("levels is non-empty"),
            }
        })
        .collect();
    let objective = |y: &[f64]| empirical_error_slice(y, obs) + lambda * tv_unchecked(g, y);
    (objective(&snapped) <= objective(x)).then_some(snapped)
}

fn finish(g: &Graph, obs: &Observations, cfg: &SolverConfig, x: Vec<f64>) -> SolverResult {
    let x = if cfg.polish {
        polish(g, obs, cfg.lambda, &x).unwrap_or(x)
    } else {
        x
    };
    SolverResult::evaluate(g, obs, cfg.lambda, x)
}

fn shrink(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// Solves the network Lasso by ADMM.
///
/// Every edge `{i,j}` holds copies `z_ij`, `z_ji` of its endpoint values
/// with scaled duals `u_ij`, `u_ji`. One sweep updates all node values,
/// then all edge copies in closed form, then the duals. Iteration order is
/// fixed, so results are bit-reproducible.
///
/// With `polish` set, the returned signal is the label-rounded iterate
/// whenever rounding does not raise the objective.
///
/// If the tolerances are not met within `max_iters`, the iterate with the
/// lowest objective among those checked is returned with
/// `converged = false`.
pub fn solve_admm(g: &Graph, obs: &Observations, cfg: &SolverConfig) -> Result<SolverResult, SolverError> {
    cfg.validate()?;
    obs.check_on(g)?;
    if !g.is_connected() {
        log::warn!("graph is not connected; unsampled components are not determined by the data");
    }
    let n = g.node_count();
    let m = g.edge_count();
    let edges = g.edges();
    let weights = g.weights();
    let rho = cfg.rho;

    let mut label: Vec<Option<f64>> = vec![None; n];
    for (&i, &y) in obs.nodes.iter().zip(&obs.labels) {
        label[i] = Some(y);
    }
    // slot 2e is the copy held by e.lo, 2e+1 the one held by e.hi
    let slots: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            g.neighbors(i)
                .iter()
                .map(|&(_, e)| if edges[e].lo == i { 2 * e } else { 2 * e + 1 })
                .collect()
        })
        .collect();

    let start = match cfg.init {
        Init::Zero => 0.0,
        Init::MedianLabel => {
            let mut ys = obs.labels.clone();
            ys.sort_by(f64::total_cmp);
            ys.get(ys.len() / 2).copied().unwrap_or(0.0)
        }
    };
    let mut x = vec![start; n];
    let mut z = vec![start; 2 * m];
    let mut u = vec![0.0; 2 * m];
    let mut z_prev = vec![0.0; 2 * m];

    let eps_scale = ((2 * m) as f64).sqrt();
    let mut trace = cfg.record_trace.then(Vec::new);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;

    for iter in 1..=cfg.max_iters {
        for i in 0..n {
            let d = slots[i].len();
            if d == 0 {
                if let Some(y) = label[i] {
                    x[i] = y;
                }
                continue;
            }
            let c = slots[i].iter().map(|&k| z[k] - u[k]).sum::<f64>() / d as f64;
            x[i] = match label[i] {
                None => c,
                Some(y) => y + shrink(c - y, 1.0 / (rho * d as f64)),
            };
        }

        z_prev.copy_from_slice(&z);
        for (e, edge) in edges.iter().enumerate() {
            let p = x[edge.lo] + u[2 * e];
            let q = x[edge.hi] + u[2 * e + 1];
            let diff = p - q;
            let theta = (cfg.lambda * weights[e] / rho).min(diff.abs() / 2.0);
            let s = if diff > 0.0 {
                1.0
            } else if diff < 0.0 {
                -1.0
            } else {
                0.0
            };
            z[2 * e] = p - theta * s;
            z[2 * e + 1] = q + theta * s;
        }

        let mut r2 = 0.0;
        let mut s2 = 0.0;
        let mut ax2 = 0.0;
        let mut z2 = 0.0;
        let mut u2 = 0.0;
        for (e, edge) in edges.iter().enumerate() {
            for (k, node) in [(2 * e, edge.lo), (2 * e + 1, edge.hi)] {
                let r = x[node] - z[k];
                u[k] += r;
                r2 += r * r;
                let dz = z[k] - z_prev[k];
                s2 += dz * dz;
                ax2 += x[node] * x[node];
                z2 += z[k] * z[k];
                u2 += u[k] * u[k];
            }
        }
        primal = r2.sqrt();
        dual = rho * s2.sqrt();
        if let Some(t) = trace.as_mut() {
            t.push(IterRecord {
                iteration: iter,
                primal_residual: primal,
                dual_residual: dual,
            });
        }

        let eps_pri = eps_scale * cfg.eps_abs + cfg.eps_rel * ax2.sqrt().max(z2.sqrt());
        let eps_dual = eps_scale * cfg.eps_abs + cfg.eps_rel * rho * u2.sqrt();
        if primal <= eps_pri && dual <= eps_dual {
            let mut res = finish(g, obs, cfg, x);
            res.iterations = iter;
            res.primal_residual = primal;
            res.dual_residual = dual;
            res.trace = trace;
            return Ok(res);
        }

        if iter % 16 == 0 || iter == cfg.max_iters {
            let obj = empirical_error_slice(&x, obs) + cfg.lambda * tv_unchecked(g, &x);
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, x.clone()));
            }
        }
    }

    let (_, bx) = best.expect("at least one checkpoint");
    let mut res = finish(g, obs, cfg, bx);
    res.iterations = cfg.max_iters;
    res.converged = false;
    res.primal_residual = primal;
    res.dual_residual = dual;
    res.trace = trace;
    Ok(res)
}

pub const ORACLE_MAX_NODES: usize = 8;
pub const ORACLE_MAX_SAMPLES: usize = 4;

/// Exact minimizer by enumeration over assignments of observed label values
/// to every node. Some optimal solution of the piecewise-linear program
/// always takes only observed label values, so the search is exact.
pub fn solve_oracle(g: &Graph, obs: &Observations, lambda: f64) -> Result<(f64, GraphSignal), SolverError> {
    let n = g.node_count();
    if n > ORACLE_MAX_NODES || obs.len() > ORACLE_MAX_SAMPLES {
        return Err(SolverError::InstanceTooLarge {
            max_nodes: ORACLE_MAX_NODES,
            max_samples: ORACLE_MAX_SAMPLES,
        });
    }
    if obs.is_empty() {
        return Err(SolverError::InvalidObservations("oracle needs at least one sample".into()));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(SolverError::InvalidConfig("lambda must be non-negative".into()));
    }
    obs.check_on(g)?;

    let mut values = obs.labels.clone();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let k = values.len();

    let cost = |choice: &[usize]| -> f64 {
        let mut total = 0.0;
        for (&i, &y) in obs.nodes.iter().zip(&obs.labels) {
            total += (values[choice[i]] - y).abs();
        }
        let mut var = 0.0;
        for (e, &w) in g.edges().iter().zip(g.weights()) {
            var += w * (values[choice[e.lo]] - values[choice[e.hi]]).abs();
        }
        total + lambda * var
    };

    let mut choice = vec![0usize; n];
    let mut best = (cost(&choice), choice.clone());
    'outer: loop {
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                break 'outer;
            }
            choice[pos] += 1;
            if choice[pos] < k {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
        let c = cost(&choice);
        if c < best.0 {
            best = (c, choice.clone());
        }
    }
    let x = best.1.iter().map(|&c| values[c]).collect();
    Ok((best.0, GraphSignal::new(x)?))
}
