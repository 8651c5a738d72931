use super::{Evidence, Posterior};
use crate::compiler::BayesianNetwork;
use crate::error::{Error, Result};

/// Largest network [`exact_enumeration`] accepts.
pub const MAX_EXACT_NODES: usize = 25;

/// Exact posteriors by summing the joint distribution over every assignment
/// consistent with the evidence.
pub fn exact_enumeration(bn: &BayesianNetwork, evidence: &Evidence) -> Result<Posterior> {
    if bn.len() > MAX_EXACT_NODES {
        return Err(Error::NetworkTooLarge {
            nodes: bn.len(),
            max: MAX_EXACT_NODES,
        });
    }
    let slots = evidence.resolve(bn)?;
    let free: Vec<usize> = (0..bn.len()).filter(|&i| slots[i].is_none()).collect();

    let mut values: Vec<bool> = slots.iter().map(|s| s.unwrap_or(false)).collect();
    let mut total = 0.0;
    let mut mass_true = vec![0.0; bn.len()];
    for mask in 0u64..(1u64 << free.len()) {
        for (bit, &i) in free.iter().enumerate() {
            values[i] = mask >> bit & 1 == 1;
        }
        let mut joint = 1.0;
        for &n in bn.topological_order() {
            let p = bn.node(n).cpt.p_true(&values);
            joint *= if values[n] { p } else { 1.0 - p };
            if joint == 0.0 {
                break;
            }
        }
        if joint == 0.0 {
            continue;
        }
        total += joint;
        for &i in &free {
            if values[i] {
                mass_true[i] += joint;
            }
        }
    }
    if !(total > 0.0) {
        return Err(Error::ZeroProbability);
    }

    let p_true = bn
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let p = match slots[i] {
                Some(v) => f64::from(u8::from(v)),
                None => (mass_true[i] / total).clamp(0.0, 1.0),
            };
            (node.id.clone(), p)
        })
        .collect();
    Ok(Posterior {
        p_true,
        n_samples: 0,
        effective_sample_size: f64::INFINITY,
        seed: 0,
    })
}
