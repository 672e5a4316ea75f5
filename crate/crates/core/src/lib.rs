//! Learning clustered graph signals from a few noisy node samples.
//!
//! * [`graph`]: weighted graphs, signals, partitions and total variation
//! * [`io`]: the line-oriented file formats
//! * [`generator`]: planted-partition graphs and noisy observations
//! * [`flow`]: max flow and flow feasibility with node demands
//! * [`certify`]: the network compatibility condition and its error bound
//! * [`sampling`]: boundary-aware and uniform sampling sets
//! * [`solver`]: network Lasso by ADMM, with a brute-force oracle
//! * [`experiment`]: the end-to-end sampling comparison

pub mod certify;
pub mod experiment;
pub mod flow;
pub mod generator;
pub mod graph;
pub mod io;
pub mod sampling;
pub mod solver;
