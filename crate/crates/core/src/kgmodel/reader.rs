use std::collections::{BTreeMap, BTreeSet};

use super::turtle::{parse_document, Name, Term, Triple};
use super::*;
use crate::error::Result;

/// Outcome of reading a knowledge-base document: the model plus every
/// diagnostic from reading and validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedKb {
    pub kb: KnowledgeBase,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParsedKb {
    pub fn is_valid(&self) -> bool {
        error_count(&self.diagnostics) == 0
    }

    /// The knowledge base, or [`Error::InvalidKb`] when any error-level
    /// diagnostic was raised.
    pub fn into_valid(self) -> Result<KnowledgeBase> {
        match error_count(&self.diagnostics) {
            0 => Ok(self.kb),
            n => Err(Error::InvalidKb(n)),
        }
    }
}

/// Parses a knowledge-base document. Syntax errors abort with a position;
/// everything else is reported through diagnostics on a possibly partial
/// knowledge base.
pub fn parse_kb(document: &str) -> Result<ParsedKb> {
    let doc = parse_document(document)?;
    let mut reader = Reader::default();
    reader.kb.extra_prefixes = doc.extra_prefixes;

    let mut by_subject: BTreeMap<String, Vec<Triple>> = BTreeMap::new();
    for t in doc.triples {
        by_subject.entry(t.subject.clone()).or_default().push(t);
    }
    for (subject, triples) in by_subject {
        reader.subject(&subject, triples);
    }

    let mut diagnostics = reader.diagnostics;
    diagnostics.extend(validate(&reader.kb));
    Ok(ParsedKb {
        kb: reader.kb,
        diagnostics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RecordType {
    Entity,
    Action,
    Signal,
    SignalClass,
    AttenuationLaw,
    Classifier,
    Sensor,
    Room,
    AssetType,
    Barrier,
}

impl RecordType {
    fn from_name(name: &Name) -> Option<Self> {
        Some(match (name.prefix.as_str(), name.local.as_str()) {
            ("skg", "Entity") => RecordType::Entity,
            ("skg", "Action") => RecordType::Action,
            ("skg", "Signal") => RecordType::Signal,
            ("skg", "SignalClass") => RecordType::SignalClass,
            ("skg", "AttenuationLaw") => RecordType::AttenuationLaw,
            ("skg", "Classifier") => RecordType::Classifier,
            ("sosa", "Sensor") => RecordType::Sensor,
            ("rec", "Room") => RecordType::Room,
            ("skg", "AssetType") => RecordType::AssetType,
            ("skg", "Barrier") => RecordType::Barrier,
            _ => return None,
        })
    }

    /// Predicates understood for this record type, besides `rdf:type` and
    /// `skos:prefLabel`.
    fn predicates(self) -> &'static [(&'static str, &'static str)] {
        match self {
            RecordType::Entity => &[("skg", "priorPresence")],
            RecordType::Action => &[
                ("skg", "performedBy"),
                ("skg", "actsOn"),
                ("skg", "probGivenPresent"),
                ("skg", "createsSignal"),
                ("skg", "roomWeights"),
            ],
            RecordType::Signal => &[
                ("skg", "signalClass"),
                ("skg", "sourceLevel"),
                ("skg", "attenuation"),
            ],
            RecordType::SignalClass => &[("skos", "broader")],
            RecordType::AttenuationLaw => &[("skg", "lawKind"), ("skg", "referenceDistance")],
            RecordType::Classifier => &[
                ("skg", "detectsClass"),
                ("skg", "truePositiveRate"),
                ("skg", "falsePositiveRate"),
                ("skg", "classCount"),
            ],
            RecordType::Sensor => &[
                ("skg", "position"),
                ("sosa", "implements"),
                ("skg", "detectionThreshold"),
                ("skg", "detectionSlope"),
            ],
            RecordType::Room => &[("skg", "centroid"), ("skg", "containsAsset")],
            RecordType::AssetType => &[],
            RecordType::Barrier => &[("skg", "segment"), ("skg", "attenuationDb")],
        }
    }
}

#[derive(Default)]
struct Reader {
    kb: KnowledgeBase,
    diagnostics: Vec<Diagnostic>,
}

/// Property values of one subject, grouped by predicate.
struct Props<'r> {
    subject: String,
    values: BTreeMap<Name, Vec<Term>>,
    diagnostics: &'r mut Vec<Diagnostic>,
    ok: bool,
}

impl<'r> Props<'r> {
    fn fail(&mut self, code: &str, message: String) {
        self.diagnostics
            .push(Diagnostic::error(code, &self.subject, message));
        self.ok = false;
    }

    fn single(&mut self, prefix: &str, local: &str) -> Option<Term> {
        let key = Name::new(prefix, local);
        let values = self.values.remove(&key)?;
        if values.len() > 1 {
            self.fail(
                "multi-valued",
                format!("{key} must have exactly one value, found {}", values.len()),
            );
            return None;
        }
        values.into_iter().next()
    }

    fn required(&mut self, prefix: &str, local: &str) -> Option<Term> {
        let present = self.values.contains_key(&Name::new(prefix, local));
        let term = self.single(prefix, local);
        if !present {
            self.fail("missing-property", format!("required property {prefix}:{local} is missing"));
        }
        term
    }

    fn bad_value(&mut self, what: &str, expected: &str, term: &Term) {
        self.fail(
            "bad-value",
            format!("{what} expects a {expected}, found a {}", term.kind_name()),
        );
    }

    fn number(&mut self, prefix: &str, local: &str) -> Option<f64> {
        match self.required(prefix, local)? {
            Term::Number(n) => Some(n),
            other => {
                self.bad_value(&format!("{prefix}:{local}"), "number", &other);
                None
            }
        }
    }

    fn reference(&mut self, prefix: &str, local: &str) -> Option<String> {
        match self.required(prefix, local)? {
            Term::Name(n) => Some(n.local),
            other => {
                self.bad_value(&format!("{prefix}:{local}"), "name", &other);
                None
            }
        }
    }

    fn optional_reference(&mut self, prefix: &str, local: &str) -> Option<String> {
        match self.single(prefix, local)? {
            Term::Name(n) => Some(n.local),
            other => {
                self.bad_value(&format!("{prefix}:{local}"), "name", &other);
                None
            }
        }
    }

    fn references(&mut self, prefix: &str, local: &str) -> BTreeSet<String> {
        let values = self.values.remove(&Name::new(prefix, local)).unwrap_or_default();
        let mut out = BTreeSet::new();
        for v in values {
            match v {
                Term::Name(n) => {
                    out.insert(n.local);
                }
                other => self.bad_value(&format!("{prefix}:{local}"), "name", &other),
            }
        }
        out
    }

    fn string(&mut self, prefix: &str, local: &str) -> Option<String> {
        match self.single(prefix, local)? {
            Term::Str(s) => Some(s),
            other => {
                self.bad_value(&format!("{prefix}:{local}"), "string", &other);
                None
            }
        }
    }

    fn label(&mut self) -> String {
        self.string("skos", "prefLabel").unwrap_or_default()
    }

    fn numbers(&mut self, prefix: &str, local: &str, arity: usize) -> Option<Vec<f64>> {
        let term = self.required(prefix, local)?;
        let expected = format!("list of {arity} numbers");
        match &term {
            Term::List(items) if items.len() == arity => {
                let nums: Option<Vec<f64>> = items
                    .iter()
                    .map(|t| match t {
                        Term::Number(n) => Some(*n),
                        _ => None,
                    })
                    .collect();
                if nums.is_none() {
                    self.bad_value(&format!("{prefix}:{local}"), &expected, &term);
                }
                nums
            }
            _ => {
                self.bad_value(&format!("{prefix}:{local}"), &expected, &term);
                None
            }
        }
    }

    fn point(&mut self, prefix: &str, local: &str) -> Option<Point2D> {
        self.numbers(prefix, local, 2)
            .map(|v| Point2D::new(v[0], v[1]))
    }
}

impl Reader {
    fn subject(&mut self, subject: &str, triples: Vec<Triple>) {
        let mut types = Vec::new();
        let mut unknown_types = Vec::new();
        for t in &triples {
            if t.predicate.is_rdf_type() {
                match &t.object {
                    Term::Name(n) => match RecordType::from_name(n) {
                        Some(rt) => types.push(rt),
                        None => unknown_types.push(n.to_string()),
                    },
                    other => unknown_types.push(format!("{} literal", other.kind_name())),
                }
            }
        }
        types.dedup();

        let record_type = match types.as_slice() {
            [] => {
                let message = if unknown_types.is_empty() {
                    "subject has no rdf:type; its triples are kept but ignored".to_string()
                } else {
                    format!("unrecognised type {}; triples kept but ignored", unknown_types.join(", "))
                };
                self.diagnostics
                    .push(Diagnostic::warning("unknown-type", subject, message));
                self.kb.unknown_triples.extend(triples);
                return;
            }
            [one] => *one,
            many => {
                self.diagnostics.push(Diagnostic::error(
                    "type-conflict",
                    subject,
                    format!("subject has {} conflicting record types", many.len()),
                ));
                self.kb.unknown_triples.extend(triples);
                return;
            }
        };

        // split into understood values and preserved extras
        let known = record_type.predicates();
        let mut values: BTreeMap<Name, Vec<Term>> = BTreeMap::new();
        for t in triples {
            let p = &t.predicate;
            let understood = p.is("skos", "prefLabel")
                || known.iter().any(|(pre, loc)| p.is(pre, loc))
                || (p.is_rdf_type()
                    && matches!(&t.object, Term::Name(n) if RecordType::from_name(n).is_some()));
            if understood {
                if !p.is_rdf_type() {
                    values.entry(t.predicate).or_default().push(t.object);
                }
            } else {
                if !p.is_rdf_type() {
                    self.diagnostics.push(Diagnostic::warning(
                        "unknown-predicate",
                        subject,
                        format!("predicate {p} is not part of the dialect; kept but ignored"),
                    ));
                }
                self.kb.unknown_triples.insert(t);
            }
        }

        let mut props = Props {
            subject: subject.to_string(),
            values,
            diagnostics: &mut self.diagnostics,
            ok: true,
        };
        let kb = &mut self.kb;
        let id = subject.to_string();
        match record_type {
            RecordType::Entity => {
                let label = props.label();
                let prior = props.number("skg", "priorPresence");
                if let (Some(prior_presence), true) = (prior, props.ok) {
                    kb.entities.insert(
                        id.clone(),
                        EntityKind {
                            id,
                            label,
                            prior_presence,
                        },
                    );
                }
            }
            RecordType::Action => {
                let label = props.label();
                let performed_by = props.reference("skg", "performedBy");
                let acts_on = props.reference("skg", "actsOn");
                let prob = props.number("skg", "probGivenPresent");
                let signal = props.reference("skg", "createsSignal");
                let room_weights = read_room_weights(&mut props);
                if let (Some(performed_by), Some(acts_on), Some(prob_given_present), Some(creates_signal), true) =
                    (performed_by, acts_on, prob, signal, props.ok)
                {
                    kb.actions.insert(
                        id.clone(),
                        ActionSpec {
                            id,
                            label,
                            performed_by,
                            acts_on,
                            prob_given_present,
                            creates_signal,
                            room_weights,
                        },
                    );
                }
            }
            RecordType::Signal => {
                let label = props.label();
                let class = props.reference("skg", "signalClass");
                let level = props.number("skg", "sourceLevel");
                let law = props.reference("skg", "attenuation");
                if let (Some(signal_class), Some(source_level), Some(attenuation), true) =
                    (class, level, law, props.ok)
                {
                    kb.signals.insert(
                        id.clone(),
                        SignalSpec {
                            id,
                            label,
                            signal_class,
                            source_level,
                            attenuation,
                        },
                    );
                }
            }
            RecordType::SignalClass => {
                let label = props.label();
                let broader = props.optional_reference("skos", "broader");
                if props.ok {
                    kb.signal_classes
                        .insert(id.clone(), SignalClass { id, label, broader });
                }
            }
            RecordType::AttenuationLaw => {
                let label = props.label();
                let kind = match props.required("skg", "lawKind") {
                    Some(Term::Str(s)) => match AttenuationKind::parse(&s) {
                        Some(k) => Some(k),
                        None => {
                            props.fail(
                                "bad-value",
                                format!("unknown law kind `{s}` (expected inverse-square or none)"),
                            );
                            None
                        }
                    },
                    Some(other) => {
                        props.bad_value("skg:lawKind", "string", &other);
                        None
                    }
                    None => None,
                };
                let reference = props.number("skg", "referenceDistance");
                if let (Some(kind), Some(reference_distance), true) = (kind, reference, props.ok) {
                    kb.attenuation_laws.insert(
                        id.clone(),
                        AttenuationLaw {
                            id,
                            label,
                            kind,
                            reference_distance,
                        },
                    );
                }
            }
            RecordType::Classifier => {
                let label = props.label();
                let detects_classes = props.references("skg", "detectsClass");
                let tpr = props.number("skg", "truePositiveRate");
                let fpr = props.number("skg", "falsePositiveRate");
                let class_count = match props.single("skg", "classCount") {
                    None => None,
                    Some(Term::Number(n)) if n >= 0.0 && n.fract() == 0.0 && n <= u32::MAX as f64 => {
                        Some(n as u32)
                    }
                    Some(other) => {
                        props.fail(
                            "bad-value",
                            format!("skg:classCount expects a non-negative integer, found {other:?}"),
                        );
                        None
                    }
                };
                if let (Some(true_positive_rate), Some(false_positive_rate), true) = (tpr, fpr, props.ok) {
                    kb.classifiers.insert(
                        id.clone(),
                        ClassifierSpec {
                            id,
                            label,
                            detects_classes,
                            true_positive_rate,
                            false_positive_rate,
                            class_count,
                        },
                    );
                }
            }
            RecordType::Sensor => {
                let label = props.label();
                let position = props.point("skg", "position");
                let classifier = props.reference("sosa", "implements");
                let threshold = props.number("skg", "detectionThreshold");
                let slope = props.number("skg", "detectionSlope");
                if let (Some(position), Some(classifier), Some(detection_threshold), Some(detection_slope), true) =
                    (position, classifier, threshold, slope, props.ok)
                {
                    kb.sensors.insert(
                        id.clone(),
                        SensorSpec {
                            id,
                            label,
                            position,
                            classifier,
                            detection_threshold,
                            detection_slope,
                        },
                    );
                }
            }
            RecordType::Room => {
                let label = props.label();
                let centroid = props.point("skg", "centroid");
                let contains_assets = props.references("skg", "containsAsset");
                if let (Some(centroid), true) = (centroid, props.ok) {
                    kb.rooms.insert(
                        id.clone(),
                        Room {
                            id,
                            label,
                            centroid,
                            contains_assets,
                        },
                    );
                }
            }
            RecordType::AssetType => {
                let label = props.label();
                if props.ok {
                    kb.asset_types.insert(id.clone(), AssetType { id, label });
                }
            }
            RecordType::Barrier => {
                let label = props.label();
                let segment = props.numbers("skg", "segment", 4);
                let attenuation = props.number("skg", "attenuationDb");
                if let (Some(s), Some(attenuation), true) = (segment, attenuation, props.ok) {
                    kb.barriers.insert(
                        id.clone(),
                        Barrier {
                            id,
                            label,
                            segment: (Point2D::new(s[0], s[1]), Point2D::new(s[2], s[3])),
                            attenuation,
                        },
                    );
                }
            }
        }
    }
}

/// `skg:roomWeights ( room1 w1 room2 w2 … )`
fn read_room_weights(props: &mut Props<'_>) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let Some(term) = props.single("skg", "roomWeights") else {
        return out;
    };
    let Term::List(items) = &term else {
        props.bad_value("skg:roomWeights", "list of room/weight pairs", &term);
        return out;
    };
    if items.len() % 2 != 0 {
        props.bad_value("skg:roomWeights", "list of room/weight pairs", &term);
        return out;
    }
    for pair in items.chunks(2) {
        match (&pair[0], &pair[1]) {
            (Term::Name(room), Term::Number(w)) => {
                if out.insert(room.local.clone(), *w).is_some() {
                    props.fail(
                        "bad-value",
                        format!("room `{}` appears twice in skg:roomWeights", room.local),
                    );
                }
            }
            _ => {
                props.bad_value("skg:roomWeights", "list of room/weight pairs", &term);
                return BTreeMap::new();
            }
        }
    }
    out
}
