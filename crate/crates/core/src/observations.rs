//! Sensor observation records and their two file formats: the plain
//! evidence JSON and SOSA-style JSON-LD.

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kgmodel::FIXED_NAMESPACES;

/// One classifier output: did `sensor` report `observed_class`?
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub sensor: String,
    #[serde(rename = "class")]
    pub observed_class: String,
    pub result: bool,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "rfc3339")]
    pub time: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceFile {
    pub observations: Vec<ObservationRecord>,
}

mod rfc3339 {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &Option<DateTime<Utc>>, s: S) -> Result<S::Ok, S::Error> {
        match t {
            Some(t) => s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Secs, true)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DateTime<Utc>>, D::Error> {
        let raw: Option<String> = Option::deserialize(d)?;
        raw.map(|s| {
            DateTime::parse_from_rfc3339(&s)
                .map(|t| t.with_timezone(&Utc))
                .map_err(serde::de::Error::custom)
        })
        .transpose()
    }
}

/// Writes records as a JSON-LD graph of `sosa:Observation` nodes, in the
/// order given.
pub fn export_observations(records: &[ObservationRecord]) -> String {
    let context: serde_json::Map<String, Value> = FIXED_NAMESPACES
        .iter()
        .filter(|(p, _)| matches!(*p, "skg" | "sosa" | "xsd"))
        .map(|(p, iri)| (p.to_string(), Value::String(iri.to_string())))
        .collect();
    let graph: Vec<Value> = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut node = json!({
                "@id": format!("skg:observation-{i}"),
                "@type": "sosa:Observation",
                "sosa:madeBySensor": {"@id": format!("skg:{}", r.sensor)},
                "sosa:observedProperty": {"@id": format!("skg:{}", r.observed_class)},
                "sosa:hasSimpleResult": r.result,
            });
            if let Some(t) = r.time {
                node["sosa:resultTime"] = json!({
                    "@type": "xsd:dateTime",
                    "@value": t.to_rfc3339_opts(SecondsFormat::Secs, true),
                });
            }
            node
        })
        .collect();
    let doc = json!({"@context": context, "@graph": graph});
    serde_json::to_string_pretty(&doc).unwrap_or_default()
}

/// Reads observations from either the plain evidence JSON
/// (`{"observations": [...]}`) or an exported JSON-LD document.
pub fn parse_observations(text: &str) -> Result<Vec<ObservationRecord>> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::InvalidObservations(e.to_string()))?;
    if value.get("@graph").is_some() {
        return from_json_ld(&value);
    }
    let file: EvidenceFile =
        serde_json::from_value(value).map_err(|e| Error::InvalidObservations(e.to_string()))?;
    Ok(file.observations)
}

/// Local id of a JSON-LD reference: `skg:mic-1`, a full IRI, or a bare id.
fn local_id(v: &Value) -> Option<String> {
    let s = match v {
        Value::String(s) => s.as_str(),
        Value::Object(o) => o.get("@id")?.as_str()?,
        _ => return None,
    };
    let local = s.rsplit(['#', '/', ':']).next().unwrap_or(s);
    (!local.is_empty()).then(|| local.to_string())
}

fn from_json_ld(doc: &Value) -> Result<Vec<ObservationRecord>> {
    let bad = |msg: String| Error::InvalidObservations(msg);
    let graph = doc["@graph"]
        .as_array()
        .ok_or_else(|| bad("@graph must be an array".into()))?;
    let mut out = Vec::new();
    for (i, node) in graph.iter().enumerate() {
        let is_observation = match &node["@type"] {
            Value::String(t) => t == "sosa:Observation",
            Value::Array(ts) => ts.iter().any(|t| t == "sosa:Observation"),
            _ => false,
        };
        if !is_observation {
            continue;
        }
        let sensor = local_id(&node["sosa:madeBySensor"])
            .ok_or_else(|| bad(format!("observation {i} has no sosa:madeBySensor")))?;
        let observed_class = local_id(&node["sosa:observedProperty"])
            .ok_or_else(|| bad(format!("observation {i} has no sosa:observedProperty")))?;
        let result = match &node["sosa:hasSimpleResult"] {
            Value::Bool(b) => *b,
            Value::Object(o) => o
                .get("@value")
                .and_then(Value::as_bool)
                .ok_or_else(|| bad(format!("observation {i} has a non-boolean result")))?,
            _ => return Err(bad(format!("observation {i} has a non-boolean result"))),
        };
        let time = match &node["sosa:resultTime"] {
            Value::Null => None,
            v => {
                let raw = v
                    .get("@value")
                    .unwrap_or(v)
                    .as_str()
                    .ok_or_else(|| bad(format!("observation {i} has a malformed resultTime")))?;
                Some(
                    DateTime::parse_from_rfc3339(raw)
                        .map_err(|e| bad(format!("observation {i}: {e}")))?
                        .with_timezone(&Utc),
                )
            }
        };
        out.push(ObservationRecord {
            sensor,
            observed_class,
            result,
            time,
        });
    }
    Ok(out)
}
