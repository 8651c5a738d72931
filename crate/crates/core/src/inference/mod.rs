//! Posterior queries over a compiled network.
//!
//! [`likelihood_weighting`] is the workhorse; [`exact_enumeration`] sums the
//! full joint and serves as the reference answer for small networks.

mod evidence;
mod exact;
mod sampling;

use std::collections::BTreeMap;

use crate::compiler::{BayesianNetwork, NodeId};
use crate::error::Result;

pub use evidence::{evidence_from_observations, observation_classes};
pub use exact::{exact_enumeration, MAX_EXACT_NODES};
pub use sampling::likelihood_weighting;

/// Samples used when the caller does not say otherwise.
pub const DEFAULT_SAMPLES: usize = 20_000;

/// Effective sample sizes below this are flagged as unreliable.
pub const LOW_ESS: f64 = 200.0;

/// Observed truth values, keyed by node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence {
    pub assignments: BTreeMap<NodeId, bool>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, id: NodeId, value: bool) -> Self {
        self.assignments.insert(id, value);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    /// Evidence as a per-node slot vector aligned with the network.
    pub(crate) fn resolve(&self, bn: &BayesianNetwork) -> Result<Vec<Option<bool>>> {
        let mut slots = vec![None; bn.len()];
        for (id, value) in &self.assignments {
            slots[bn.require(id)?] = Some(*value);
        }
        Ok(slots)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_samples: DEFAULT_SAMPLES,
            seed: 0,
            workers: 1,
        }
    }
}

impl SamplerConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        SamplerConfig {
            n_samples,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Per-node `P(true | evidence)` plus how it was obtained. Exact results
/// report `n_samples == 0` and an infinite effective sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub p_true: BTreeMap<NodeId, f64>,
    pub n_samples: usize,
    pub effective_sample_size: f64,
    pub seed: u64,
}

impl Posterior {
    pub fn get(&self, id: &NodeId) -> Option<f64> {
        self.p_true.get(id).copied()
    }

    pub fn is_exact(&self) -> bool {
        self.n_samples == 0
    }

    pub fn low_ess(&self) -> bool {
        self.effective_sample_size < LOW_ESS
    }

    pub fn max_abs_diff(&self, other: &Posterior) -> f64 {
        self.p_true
            .iter()
            .map(|(id, p)| other.get(id).map_or(f64::INFINITY, |q| (p - q).abs()))
            .fold(0.0, f64::max)
    }
}
