//! Forward sampling of a compiled network into ground-truth scenarios and
//! the observation records the sensors would have produced.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::compiler::{BayesianNetwork, NodeId, NodeKind};
use crate::error::Result;
use crate::observations::ObservationRecord;

pub use crate::observations::export_observations;

/// Time stamp of the first record of every simulated run.
pub fn epoch() -> DateTime<Utc> {
    DateTime::from_timestamp(1_704_067_200, 0).unwrap_or_default()
}

/// One joint draw: a truth value for every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub assignment: BTreeMap<NodeId, bool>,
    pub seed: u64,
}

/// Ancestral sample of the whole network, plus one record per detected node.
pub fn simulate(bn: &BayesianNetwork, seed: u64) -> (Scenario, Vec<ObservationRecord>) {
    run(bn, &vec![None; bn.len()], seed)
}

/// Like [`simulate`], but `forced` nodes are set rather than drawn. Their
/// descendants follow the forced values; their ancestors do not notice.
pub fn forced_scenario(
    bn: &BayesianNetwork,
    forced: &BTreeMap<NodeId, bool>,
    seed: u64,
) -> Result<(Scenario, Vec<ObservationRecord>)> {
    let mut slots = vec![None; bn.len()];
    for (id, value) in forced {
        slots[bn.require(id)?] = Some(*value);
    }
    Ok(run(bn, &slots, seed))
}

fn run(bn: &BayesianNetwork, forced: &[Option<bool>], seed: u64) -> (Scenario, Vec<ObservationRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![false; bn.len()];
    for &n in bn.topological_order() {
        // one draw per node whether forced or not, so forcing one node
        // leaves the random stream of every other node unchanged
        let u: f64 = rng.random();
        values[n] = match forced[n] {
            Some(v) => v,
            None => u < bn.node(n).cpt.p_true(&values),
        };
    }

    let mut records = Vec::new();
    for (node, &value) in bn.nodes().iter().zip(&values) {
        if node.id.kind != NodeKind::Detected {
            continue;
        }
        records.push(ObservationRecord {
            sensor: node.id.key[0].clone(),
            observed_class: node.id.key[1].clone(),
            result: value,
            time: Some(epoch() + Duration::seconds(records.len() as i64)),
        });
    }
    let assignment = bn
        .nodes()
        .iter()
        .zip(values)
        .map(|(node, v)| (node.id.clone(), v))
        .collect();
    (Scenario { assignment, seed }, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{Cpt, Node};

    fn chain(prior: f64, hit: f64, false_alarm: f64) -> BayesianNetwork {
        BayesianNetwork::from_nodes(vec![
            Node {
                id: NodeId::entity("a"),
                cpt: Cpt { parents: vec![], rows: vec![prior] },
            },
            Node {
                id: NodeId::detected("mic", "glass"),
                cpt: Cpt { parents: vec![0], rows: vec![false_alarm, hit] },
            },
        ])
        .unwrap()
    }

    #[test]
    fn deterministic_network() {
        let (scenario, records) = simulate(&chain(1.0, 1.0, 0.0), 9);
        assert!(scenario.assignment.values().all(|v| *v));
        assert_eq!(records.len(), 1);
        assert!(records[0].result);
        assert_eq!(records[0].time, Some(epoch()));

        let (_, records) = simulate(&chain(0.0, 1.0, 0.0), 9);
        assert!(!records[0].result);
    }

    #[test]
    fn same_seed_same_scenario() {
        let bn = chain(0.5, 0.7, 0.2);
        assert_eq!(simulate(&bn, 3), simulate(&bn, 3));
        assert_eq!(forced_scenario(&bn, &BTreeMap::new(), 3).unwrap(), simulate(&bn, 3));
    }

    #[test]
    fn forcing_clamps_and_checks_ids() {
        let bn = chain(0.0, 1.0, 0.0);
        let forced = BTreeMap::from([(NodeId::entity("a"), true)]);
        let (scenario, records) = forced_scenario(&bn, &forced, 1).unwrap();
        assert_eq!(scenario.assignment[&NodeId::entity("a")], true);
        assert!(records[0].result);

        let ghost = BTreeMap::from([(NodeId::entity("ghost"), true)]);
        assert_eq!(forced_scenario(&bn, &ghost, 1).unwrap_err().code(), "unknown-node");
    }

    #[test]
    fn epoch_is_new_year_2024() {
        assert_eq!(epoch().to_rfc3339(), "2024-01-01T00:00:00+00:00");
    }
}
