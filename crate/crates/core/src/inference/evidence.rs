use std::collections::BTreeSet;

use super::Evidence;
use crate::compiler::{BayesianNetwork, NodeId};
use crate::error::{Error, Result};
use crate::kgmodel::KnowledgeBase;
use crate::observations::ObservationRecord;

/// The `(sensor, class)` pairs mentioned by a set of observations, for
/// [`compile_with_classes`](crate::compiler::compile_with_classes).
pub fn observation_classes(records: &[ObservationRecord]) -> BTreeSet<(String, String)> {
    records
        .iter()
        .map(|r| (r.sensor.clone(), r.observed_class.clone()))
        .collect()
}

/// Maps observation records onto `detected(sensor, class)` nodes.
pub fn evidence_from_observations(
    records: &[ObservationRecord],
    bn: &BayesianNetwork,
    kb: &KnowledgeBase,
) -> Result<Evidence> {
    let mut evidence = Evidence::new();
    for r in records {
        let sensor = kb.sensor(&r.sensor)?;
        if !kb.signal_classes.contains_key(&r.observed_class)
            || !kb.classifier_of(sensor)?.detects_classes.contains(&r.observed_class)
        {
            return Err(Error::unknown("class", &r.observed_class));
        }
        let id = NodeId::detected(&r.sensor, &r.observed_class);
        if bn.index_of(&id).is_none() {
            return Err(Error::RecompileNeeded {
                sensor: r.sensor.clone(),
                class: r.observed_class.clone(),
            });
        }
        if let Some(previous) = evidence.assignments.insert(id, r.result) {
            if previous != r.result {
                return Err(Error::ConflictingEvidence {
                    sensor: r.sensor.clone(),
                    class: r.observed_class.clone(),
                });
            }
        }
    }
    Ok(evidence)
}
