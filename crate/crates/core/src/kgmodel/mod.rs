//! In-memory knowledge base: entities and the actions they perform, the
//! signals those actions create, the signal-class hierarchy, classifiers,
//! sensors, and the floor plan they live on.

mod reader;
mod turtle;
mod validate;
mod writer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::propagation::Point2D;

pub use reader::{parse_kb, ParsedKb};
pub use turtle::{Name, Term, Triple, FIXED_PREFIXES as FIXED_NAMESPACES};
pub use validate::validate;
pub use writer::serialize_kb;

#[derive(Debug, Clone, PartialEq)]
pub struct EntityKind {
    pub id: String,
    pub label: String,
    pub prior_presence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpec {
    pub id: String,
    pub label: String,
    pub performed_by: String,
    pub acts_on: String,
    pub prob_given_present: f64,
    pub creates_signal: String,
    /// Optional per-room weights for splitting `prob_given_present` across
    /// eligible rooms. Eligible rooms not listed here weigh 1.
    pub room_weights: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub id: String,
    pub label: String,
    pub signal_class: String,
    /// Decibels at the attenuation law's reference distance.
    pub source_level: f64,
    pub attenuation: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalClass {
    pub id: String,
    pub label: String,
    pub broader: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttenuationKind {
    InverseSquare,
    None,
}

impl AttenuationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttenuationKind::InverseSquare => "inverse-square",
            AttenuationKind::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "inverse-square" => Some(AttenuationKind::InverseSquare),
            "none" => Some(AttenuationKind::None),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationLaw {
    pub id: String,
    pub label: String,
    pub kind: AttenuationKind,
    pub reference_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub id: String,
    pub label: String,
    pub detects_classes: BTreeSet<String>,
    pub true_positive_rate: f64,
    pub false_positive_rate: f64,
    /// Size of the classifier's full output vocabulary, when known. Only the
    /// classes listed in `detects_classes` are modelled.
    pub class_count: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorSpec {
    pub id: String,
    pub label: String,
    pub position: Point2D,
    pub classifier: String,
    pub detection_threshold: f64,
    pub detection_slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Room {
    pub id: String,
    pub label: String,
    pub centroid: Point2D,
    pub contains_assets: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssetType {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Barrier {
    pub id: String,
    pub label: String,
    pub segment: (Point2D, Point2D),
    /// Decibels lost by a signal crossing this barrier.
    pub attenuation: f64,
}

/// The whole knowledge base. Every map is keyed by record id, and ids are
/// unique across maps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnowledgeBase {
    pub entities: BTreeMap<String, EntityKind>,
    pub actions: BTreeMap<String, ActionSpec>,
    pub signals: BTreeMap<String, SignalSpec>,
    pub signal_classes: BTreeMap<String, SignalClass>,
    pub attenuation_laws: BTreeMap<String, AttenuationLaw>,
    pub classifiers: BTreeMap<String, ClassifierSpec>,
    pub sensors: BTreeMap<String, SensorSpec>,
    pub rooms: BTreeMap<String, Room>,
    pub asset_types: BTreeMap<String, AssetType>,
    pub barriers: BTreeMap<String, Barrier>,
    /// Prefixes declared by the source document beyond the fixed vocabulary.
    pub extra_prefixes: BTreeMap<String, String>,
    /// Triples the reader did not understand, kept so they survive a
    /// parse/serialize cycle.
    pub unknown_triples: BTreeSet<Triple>,
}

impl KnowledgeBase {
    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
            && self.actions.is_empty()
            && self.signals.is_empty()
            && self.signal_classes.is_empty()
            && self.attenuation_laws.is_empty()
            && self.classifiers.is_empty()
            && self.sensors.is_empty()
            && self.rooms.is_empty()
            && self.asset_types.is_empty()
            && self.barriers.is_empty()
            && self.unknown_triples.is_empty()
    }

    pub fn action(&self, id: &str) -> Result<&ActionSpec> {
        self.actions.get(id).ok_or_else(|| Error::unknown("action", id))
    }

    pub fn sensor(&self, id: &str) -> Result<&SensorSpec> {
        self.sensors.get(id).ok_or_else(|| Error::unknown("sensor", id))
    }

    pub fn classifier_of(&self, sensor: &SensorSpec) -> Result<&ClassifierSpec> {
        self.classifiers
            .get(&sensor.classifier)
            .ok_or_else(|| Error::unknown("classifier", &sensor.classifier))
    }

    pub fn barrier_list(&self) -> Vec<Barrier> {
        self.barriers.values().cloned().collect()
    }
}

/// True when `classifier_class` is `signal_class` itself or one of its
/// ancestors along `broader` links. Matching only walks upward.
pub fn class_matches(signal_class: &str, classifier_class: &str, kb: &KnowledgeBase) -> Result<bool> {
    if !kb.signal_classes.contains_key(classifier_class) {
        return Err(Error::unknown("class", classifier_class));
    }
    let mut current = kb
        .signal_classes
        .get(signal_class)
        .ok_or_else(|| Error::unknown("class", signal_class))?;
    let mut seen = BTreeSet::new();
    loop {
        if current.id == classifier_class {
            return Ok(true);
        }
        if !seen.insert(current.id.as_str()) {
            // cycle; validate() rejects these
            return Ok(false);
        }
        match current.broader.as_deref().and_then(|b| kb.signal_classes.get(b)) {
            Some(next) => current = next,
            None => return Ok(false),
        }
    }
}

/// Rooms that contain the asset type the action acts on, sorted by id.
pub fn eligible_rooms(action: &str, kb: &KnowledgeBase) -> Result<Vec<String>> {
    let action = kb.action(action)?;
    Ok(kb
        .rooms
        .values()
        .filter(|room| room.contains_assets.contains(&action.acts_on))
        .map(|room| room.id.clone())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub subject: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: &str, subject: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.to_string(),
            subject: subject.to_string(),
            message: message.into(),
        }
    }

    pub fn warning(code: &str, subject: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code: code.to_string(),
            subject: subject.to_string(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}: {}", self.severity, self.code, self.subject, self.message)
    }
}

pub fn error_count(diagnostics: &[Diagnostic]) -> usize {
    diagnostics.iter().filter(|d| d.is_error()).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(id: &str, broader: Option<&str>) -> SignalClass {
        SignalClass {
            id: id.into(),
            label: String::new(),
            broader: broader.map(str::to_string),
        }
    }

    fn hierarchy() -> KnowledgeBase {
        let mut kb = KnowledgeBase::default();
        for c in [
            class("sound", None),
            class("glass", Some("sound")),
            class("breaking-glass", Some("glass")),
            class("dropped-glass", Some("glass")),
            class("speech", Some("sound")),
        ] {
            kb.signal_classes.insert(c.id.clone(), c);
        }
        kb
    }

    #[test]
    fn matching_walks_broader_links_upward() {
        let kb = hierarchy();
        assert!(class_matches("breaking-glass", "glass", &kb).unwrap());
        assert!(class_matches("breaking-glass", "sound", &kb).unwrap());
        assert!(class_matches("glass", "glass", &kb).unwrap());
        assert!(!class_matches("glass", "breaking-glass", &kb).unwrap());
        assert!(!class_matches("breaking-glass", "dropped-glass", &kb).unwrap());
        assert!(!class_matches("speech", "glass", &kb).unwrap());
    }

    #[test]
    fn matching_rejects_unknown_ids() {
        let kb = hierarchy();
        assert_eq!(
            class_matches("nope", "glass", &kb).unwrap_err().code(),
            "unknown-class"
        );
        assert!(class_matches("glass", "nope", &kb).is_err());
    }

    #[test]
    fn matching_terminates_on_cycles() {
        let mut kb = KnowledgeBase::default();
        kb.signal_classes.insert("a".into(), class("a", Some("b")));
        kb.signal_classes.insert("b".into(), class("b", Some("a")));
        kb.signal_classes.insert("c".into(), class("c", None));
        assert!(class_matches("a", "b", &kb).unwrap());
        assert!(!class_matches("a", "c", &kb).unwrap());
    }

    #[test]
    fn diagnostic_line_format() {
        let d = Diagnostic::error("prob-range", "attacker", "prior_presence 1.5 is outside [0, 1]");
        assert_eq!(
            d.to_string(),
            "ERROR prob-range attacker: prior_presence 1.5 is outside [0, 1]"
        );
        assert_eq!(
            Diagnostic::warning("unknown-predicate", "x", "m").to_string(),
            "WARNING unknown-predicate x: m"
        );
    }
}
