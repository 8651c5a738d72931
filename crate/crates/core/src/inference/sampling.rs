use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Evidence, Posterior, SamplerConfig};
use crate::compiler::BayesianNetwork;
use crate::error::{Error, Result};

/// Samples per work unit. Partial sums are formed per block and combined in
/// block order, so the floating-point result does not depend on how blocks
/// are spread over workers.
const BLOCK: usize = 1024;

/// Random stream for sample `index` under `seed`. Every sample gets its own
/// ChaCha stream, so any sample can be replayed in isolation.
pub(crate) fn sample_rng(base: &ChaCha8Rng, index: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(index);
    rng
}

struct Partial {
    weight: f64,
    weight_sq: f64,
    weighted_true: Vec<f64>,
}

fn run_block(
    bn: &BayesianNetwork,
    evidence: &[Option<bool>],
    base: &ChaCha8Rng,
    range: std::ops::Range<usize>,
) -> Partial {
    let mut partial = Partial {
        weight: 0.0,
        weight_sq: 0.0,
        weighted_true: vec![0.0; bn.len()],
    };
    let mut values = vec![false; bn.len()];
    for i in range {
        let mut rng = sample_rng(base, i as u64);
        let mut w = 1.0;
        for &n in bn.topological_order() {
            let p = bn.node(n).cpt.p_true(&values);
            match evidence[n] {
                Some(v) => {
                    values[n] = v;
                    w *= if v { p } else { 1.0 - p };
                }
                None => values[n] = rng.random::<f64>() < p,
            }
            if w == 0.0 {
                break;
            }
        }
        if w == 0.0 {
            continue;
        }
        partial.weight += w;
        partial.weight_sq += w * w;
        for (acc, _) in partial
            .weighted_true
            .iter_mut()
            .zip(&values)
            .filter(|(_, v)| **v)
        {
            *acc += w;
        }
    }
    partial
}

/// Likelihood-weighted estimate of every node's posterior.
///
/// Non-evidence nodes are drawn from their CPTs in topological order;
/// evidence nodes are clamped and multiply the sample weight by the
/// likelihood of their observed value. Results are bit-identical for a
/// given `(seed, n_samples)` whatever `workers` is.
pub fn likelihood_weighting(
    bn: &BayesianNetwork,
    evidence: &Evidence,
    config: &SamplerConfig,
) -> Result<Posterior> {
    if config.n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    if config.workers == 0 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    let slots = evidence.resolve(bn)?;
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    let blocks: Vec<std::ops::Range<usize>> = (0..config.n_samples)
        .step_by(BLOCK)
        .map(|start| start..(start + BLOCK).min(config.n_samples))
        .collect();

    let partials: Vec<Partial> = if config.workers == 1 || blocks.len() == 1 {
        blocks
            .into_iter()
            .map(|r| run_block(bn, &slots, &base, r))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            blocks
                .into_par_iter()
                .map(|r| run_block(bn, &slots, &base, r))
                .collect()
        })
    };

    let mut weight = 0.0;
    let mut weight_sq = 0.0;
    let mut weighted_true = vec![0.0; bn.len()];
    for p in partials {
        weight += p.weight;
        weight_sq += p.weight_sq;
        for (acc, w) in weighted_true.iter_mut().zip(p.weighted_true) {
            *acc += w;
        }
    }
    if !(weight > 0.0) {
        return Err(Error::ZeroWeight);
    }

    let p_true = bn
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let p = match slots[i] {
                Some(v) => f64::from(u8::from(v)),
                None => (weighted_true[i] / weight).clamp(0.0, 1.0),
            };
            (node.id.clone(), p)
        })
        .collect();
    Ok(Posterior {
        p_true,
        n_samples: config.n_samples,
        effective_sample_size: weight * weight / weight_sq,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{Cpt, Node, NodeId};

    fn chain(prior: f64, hit: f64, false_alarm: f64) -> BayesianNetwork {
        BayesianNetwork::from_nodes(vec![
            Node {
                id: NodeId::entity("a"),
                cpt: Cpt { parents: vec![], rows: vec![prior] },
            },
            Node {
                id: NodeId::detected("s", "b"),
                cpt: Cpt { parents: vec![0], rows: vec![false_alarm, hit] },
            },
        ])
        .unwrap()
    }

    #[test]
    fn two_node_chain_posterior() {
        // P(A|B) = 0.5*0.9 / (0.5*0.9 + 0.5*0.1) = 0.9
        let bn = chain(0.5, 0.9, 0.1);
        let ev = Evidence::new().with(NodeId::detected("s", "b"), true);
        let post = likelihood_weighting(&bn, &ev, &SamplerConfig::new(20_000, 42)).unwrap();
        assert!((post.get(&NodeId::entity("a")).unwrap() - 0.9).abs() <= 0.02);
        assert_eq!(post.get(&NodeId::detected("s", "b")), Some(1.0));
        assert!(post.effective_sample_size <= post.n_samples as f64);
    }

    #[test]
    fn impossible_evidence_fails_loudly() {
        let bn = chain(0.5, 0.0, 0.0);
        let ev = Evidence::new().with(NodeId::detected("s", "b"), true);
        let err = likelihood_weighting(&bn, &ev, &SamplerConfig::new(1000, 1)).unwrap_err();
        assert_eq!(err, Error::ZeroWeight);
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let bn = chain(0.3, 0.8, 0.05);
        let ev = Evidence::new().with(NodeId::detected("s", "b"), false);
        let one = likelihood_weighting(&bn, &ev, &SamplerConfig::new(5000, 7)).unwrap();
        let four =
            likelihood_weighting(&bn, &ev, &SamplerConfig::new(5000, 7).with_workers(4)).unwrap();
        assert_eq!(one, four);
        let other = likelihood_weighting(&bn, &ev, &SamplerConfig::new(5000, 8)).unwrap();
        assert_ne!(one, other);
    }

    #[test]
    fn rejects_bad_config_and_unknown_nodes() {
        let bn = chain(0.3, 0.8, 0.05);
        assert!(likelihood_weighting(&bn, &Evidence::new(), &SamplerConfig::new(0, 1)).is_err());
        let ev = Evidence::new().with(NodeId::entity("ghost"), true);
        assert_eq!(
            likelihood_weighting(&bn, &ev, &SamplerConfig::default()).unwrap_err().code(),
            "unknown-node"
        );
    }
}
