//! Synthetic clustered graphs and noisy node observations.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded with `seed_from_u64`,
//! which is specified bit-for-bit and therefore reproducible across
//! platforms and releases of `rand_chacha`.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{validate_graph, Graph, GraphError, GraphSignal, NodeId, Partition};
use crate::solver::Observations;

/// Connectivity attempts before [`generate_planted_partition`] gives up.
pub const MAX_CONNECTIVITY_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("no connected graph after {0} attempts")]
    DisconnectedAfterRetries(usize),
    #[error("sampling set is empty")]
    EmptySamplingSet,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Observations(#[from] crate::solver::SolverError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedPartitionConfig {
    pub cluster_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub weight: f64,
    pub seed: u64,
}

impl PlantedPartitionConfig {
    /// 30 nodes in clusters of 7, 7, 8 and 8 with unit weights. Clusters are
    /// complete (`p_in = 1`) and `p_out` is set so the expected edge count is
    /// 156: `98 + 337 * p_out = 156`.
    pub fn paper_like(seed: u64) -> Self {
        PlantedPartitionConfig {
            cluster_sizes: vec![7, 7, 8, 8],
            p_in: 1.0,
            p_out: 58.0 / 337.0,
            weight: 1.0,
            seed,
        }
    }

    pub fn node_count(&self) -> usize {
        self.cluster_sizes.iter().sum()
    }

    /// `p_in * sum C(n_c, 2) + p_out * (cross pairs)`.
    pub fn expected_edge_count(&self) -> f64 {
        let n = self.node_count();
        let intra: usize = self.cluster_sizes.iter().map(|&s| s * s.saturating_sub(1) / 2).sum();
        let total = n * n.saturating_sub(1) / 2;
        self.p_in * intra as f64 + self.p_out * (total - intra) as f64
    }

    fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |msg: &str| Err(GeneratorError::InvalidConfig(msg.to_string()));
        if self.cluster_sizes.is_empty() {
            return bad("at least one cluster required");
        }
        if self.cluster_sizes.contains(&0) {
            return bad("cluster sizes must be positive");
        }
        for p in [self.p_in, self.p_out] {
            if !(0.0..=1.0).contains(&p) {
                return bad("probabilities must lie in [0, 1]");
            }
        }
        if !(self.weight.is_finite() && self.weight > 0.0) {
            return bad("edge weight must be positive");
        }
        Ok(())
    }
}

/// Draws a planted-partition graph. Clusters occupy consecutive id blocks
/// in the order of `cluster_sizes`. Each candidate pair `i < j` is visited
/// in lexicographic order and kept with probability `p_in` or `p_out`.
/// Draws repeat on one RNG stream until the graph and every cluster are
/// connected, at most [`MAX_CONNECTIVITY_ATTEMPTS`] times.
pub fn generate_planted_partition(
    cfg: &PlantedPartitionConfig,
) -> Result<(Graph, Partition), GeneratorError> {
    cfg.validate()?;
    let n = cfg.node_count();
    let mut assignment = Vec::with_capacity(n);
    for (c, &size) in cfg.cluster_sizes.iter().enumerate() {
        assignment.extend(std::iter::repeat_n(c, size));
    }
    let partition = Partition::from_assignment(&assignment)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..MAX_CONNECTIVITY_ATTEMPTS {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let p = if assignment[i] == assignment[j] {
                    cfg.p_in
                } else {
                    cfg.p_out
                };
                if rng.random::<f64>() < p {
                    pairs.push((i, j));
                }
            }
        }
        let weights = vec![cfg.weight; pairs.len()];
        let g = validate_graph(&pairs, &weights, n)?;
        if g.is_connected() && partition.clusters().iter().all(|c| g.induces_connected(c)) {
            return Ok((g, partition));
        }
    }
    Err(GeneratorError::DisconnectedAfterRetries(MAX_CONNECTIVITY_ATTEMPTS))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    None,
    Gaussian,
    Laplace,
}

/// For `Gaussian`, `scale` is the standard deviation; for `Laplace` it is
/// the scale parameter `b` of the density `exp(-|e|/b) / 2b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub scale: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn none() -> Self {
        NoiseConfig {
            kind: NoiseKind::None,
            scale: 0.0,
            seed: 0,
        }
    }

    pub fn laplace(scale: f64, seed: u64) -> Self {
        NoiseConfig {
            kind: NoiseKind::Laplace,
            scale,
            seed,
        }
    }

    pub fn gaussian(scale: f64, seed: u64) -> Self {
        NoiseConfig {
            kind: NoiseKind::Gaussian,
            scale,
            seed,
        }
    }
}

/// Observes `x` on `nodes` with additive noise. Noise is drawn in ascending
/// node order. The stored noise is `y - x` as computed in floating point, so
/// it reproduces the labels exactly.
pub fn sample_observations(
    x: &GraphSignal,
    nodes: &[NodeId],
    noise: &NoiseConfig,
) -> Result<Observations, GeneratorError> {
    if nodes.is_empty() {
        return Err(GeneratorError::EmptySamplingSet);
    }
    if !(noise.scale.is_finite() && noise.scale >= 0.0) {
        return Err(GeneratorError::InvalidConfig(
            "noise scale must be finite and non-negative".into(),
        ));
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&bad) = sorted.iter().find(|&&i| i >= x.len()) {
        return Err(GraphError::NodeOutOfRange { node: bad, n: x.len() }.into());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let draws: Vec<f64> = match noise.kind {
        _ if noise.scale == 0.0 => vec![0.0; sorted.len()],
        NoiseKind::None => vec![0.0; sorted.len()],
        NoiseKind::Gaussian => {
            let normal = Normal::new(0.0, noise.scale)
                .map_err(|e| GeneratorError::InvalidConfig(e.to_string()))?;
            (0..sorted.len()).map(|_| normal.sample(&mut rng)).collect()
        }
        NoiseKind::Laplace => (0..sorted.len())
            .map(|_| {
                let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
                -noise.scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            })
            .collect(),
    };

    let labels: Vec<f64> = sorted.iter().zip(&draws).map(|(&i, e)| x[i] + e).collect();
    let realized: Vec<f64> = sorted.iter().zip(&labels).map(|(&i, y)| y - x[i]).collect();
    Ok(Observations::with_noise(sorted, labels, realized)?)
}
