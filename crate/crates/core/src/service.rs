//! Request-level operations shared by the command line, the HTTP service
//! and the C ABI, so that every front end computes identical numbers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::compiler::{compile_with_classes, node_label, BayesianNetwork, NodeId};
use crate::error::{Error, Result};
use crate::inference::{
    evidence_from_observations, exact_enumeration, likelihood_weighting, observation_classes,
    Posterior, SamplerConfig, DEFAULT_SAMPLES,
};
use crate::kgmodel::{eligible_rooms, parse_kb, Diagnostic, KnowledgeBase};
use crate::observations::ObservationRecord;
use crate::propagation::Point2D;
use crate::simulator::{forced_scenario, Scenario};

/// Parses and validates a knowledge base, returning it with any warnings.
pub fn load_kb(text: &str) -> Result<(KnowledgeBase, Vec<Diagnostic>)> {
    let parsed = parse_kb(text)?;
    if !parsed.is_valid() {
        return Err(Error::InvalidKb(crate::kgmodel::error_count(&parsed.diagnostics)));
    }
    Ok((parsed.kb, parsed.diagnostics))
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferOptions {
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub exact: bool,
    #[serde(default)]
    pub workers: Option<usize>,
}

impl InferOptions {
    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig::new(self.samples.unwrap_or(DEFAULT_SAMPLES), self.seed.unwrap_or(0))
            .with_workers(self.workers.unwrap_or(1))
    }
}

/// Compiles `kb` with every class the observations mention, turns the
/// records into evidence, and runs the requested inference.
pub fn infer(kb: &KnowledgeBase, records: &[ObservationRecord], options: &InferOptions) -> Result<Posterior> {
    let bn = compile_with_classes(kb, &observation_classes(records))?;
    let evidence = evidence_from_observations(records, &bn, kb)?;
    if options.exact {
        exact_enumeration(&bn, &evidence)
    } else {
        likelihood_weighting(&bn, &evidence, &options.sampler())
    }
}

pub fn method_name(posterior: &Posterior) -> &'static str {
    if posterior.is_exact() {
        "exact"
    } else {
        "likelihood-weighting"
    }
}

/// One `label value` line per node, in network order, values to four
/// decimals.
pub fn posterior_table(posterior: &Posterior) -> String {
    let mut out = String::new();
    for (id, p) in &posterior.p_true {
        let _ = writeln!(out, "{} {p:.4}", node_label(id));
    }
    out
}

pub fn posterior_json(posterior: &Posterior) -> Value {
    let posteriors: Map<String, Value> = posterior
        .p_true
        .iter()
        .map(|(id, p)| (node_label(id), json!(p)))
        .collect();
    let nodes: Vec<Value> = posterior
        .p_true
        .iter()
        .map(|(id, p)| {
            json!({
                "label": node_label(id),
                "kind": id.kind.as_str(),
                "key": id.key,
                "p_true": p,
            })
        })
        .collect();
    let ess = if posterior.effective_sample_size.is_finite() {
        json!(posterior.effective_sample_size)
    } else {
        Value::Null
    };
    json!({
        "posteriors": posteriors,
        "nodes": nodes,
        "n_samples": posterior.n_samples,
        "effective_sample_size": ess,
        "seed": posterior.seed,
        "method": method_name(posterior),
    })
}

/// Parses `node=bool` pairs as used by `simulate --force`.
pub fn parse_forced(pairs: &[String]) -> Result<BTreeMap<NodeId, bool>> {
    let mut forced = BTreeMap::new();
    for pair in pairs {
        let (node, value) = pair
            .rsplit_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("expected node=bool, got `{pair}`")))?;
        let value = match value.trim() {
            "true" => true,
            "false" => false,
            other => return Err(Error::InvalidArgument(format!("`{other}` is not true or false"))),
        };
        forced.insert(node.parse()?, value);
    }
    Ok(forced)
}

/// Parses the keys of a `{"node label": bool}` map.
pub fn forced_from_labels(labels: &BTreeMap<String, bool>) -> Result<BTreeMap<NodeId, bool>> {
    labels
        .iter()
        .map(|(label, v)| Ok((label.parse()?, *v)))
        .collect()
}

pub fn run_simulation(
    bn: &BayesianNetwork,
    forced: &BTreeMap<NodeId, bool>,
    seed: u64,
) -> Result<(Scenario, Vec<ObservationRecord>)> {
    forced_scenario(bn, forced, seed)
}

pub fn simulation_json(scenario: &Scenario, records: &[ObservationRecord]) -> Value {
    let assignment: Map<String, Value> = scenario
        .assignment
        .iter()
        .map(|(id, v)| (node_label(id), json!(v)))
        .collect();
    json!({
        "seed": scenario.seed,
        "scenario": assignment,
        "observations": records,
    })
}

fn point(p: Point2D) -> Value {
    json!({"x": p.x, "y": p.y})
}

/// Everything a floor-plan view needs: geometry, sensors, and the causal
/// vocabulary with the rooms each action can happen in.
pub fn model_json(kb: &KnowledgeBase, bn: &BayesianNetwork) -> Result<Value> {
    let rooms: Vec<Value> = kb
        .rooms
        .values()
        .map(|r| {
            json!({
                "id": r.id,
                "label": r.label,
                "centroid": point(r.centroid),
                "assets": r.contains_assets,
            })
        })
        .collect();
    let sensors = kb
        .sensors
        .values()
        .map(|s| {
            let classifier = kb.classifier_of(s)?;
            Ok(json!({
                "id": s.id,
                "label": s.label,
                "position": point(s.position),
                "classifier": classifier.id,
                "classes": classifier.detects_classes,
                "detection_threshold": s.detection_threshold,
                "detection_slope": s.detection_slope,
            }))
        })
        .collect::<Result<Vec<Value>>>()?;
    let barriers: Vec<Value> = kb
        .barriers
        .values()
        .map(|b| {
            json!({
                "id": b.id,
                "label": b.label,
                "from": point(b.segment.0),
                "to": point(b.segment.1),
                "attenuation_db": b.attenuation,
            })
        })
        .collect();
    let entities: Vec<Value> = kb
        .entities
        .values()
        .map(|e| json!({"id": e.id, "label": e.label, "prior_presence": e.prior_presence}))
        .collect();
    let actions = kb
        .actions
        .values()
        .map(|a| {
            let rooms: Vec<Value> = eligible_rooms(&a.id, kb)?
                .iter()
                .map(|r| json!({"id": r, "centroid": point(kb.rooms[r].centroid)}))
                .collect();
            Ok(json!({
                "id": a.id,
                "label": a.label,
                "performed_by": a.performed_by,
                "acts_on": a.acts_on,
                "signal": a.creates_signal,
                "prob_given_present": a.prob_given_present,
                "rooms": rooms,
            }))
        })
        .collect::<Result<Vec<Value>>>()?;
    let classes: Vec<Value> = kb
        .signal_classes
        .values()
        .map(|c| json!({"id": c.id, "label": c.label, "broader": c.broader}))
        .collect();
    Ok(json!({
        "rooms": rooms,
        "sensors": sensors,
        "barriers": barriers,
        "entities": entities,
        "actions": actions,
        "signal_classes": classes,
        "node_count": bn.len(),
        "exact_available": bn.len() <= crate::inference::MAX_EXACT_NODES,
    }))
}
