use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::turtle::{Term, FIXED_PREFIXES};
use super::*;

/// Writes the knowledge base in the same Turtle dialect `parse_kb` reads.
/// Statements are ordered by subject id, then predicate, so the output is
/// a pure function of the model.
pub fn serialize_kb(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    for (prefix, iri) in FIXED_PREFIXES {
        let _ = writeln!(out, "@prefix {prefix}: <{iri}> .");
    }
    for (prefix, iri) in &kb.extra_prefixes {
        let _ = writeln!(out, "@prefix {prefix}: <{iri}> .");
    }

    let mut subjects: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    let mut add = |subject: &str, pairs: Vec<(String, String)>| {
        subjects.entry(subject.to_string()).or_default().extend(pairs);
    };

    for e in kb.entities.values() {
        add(&e.id, with_label(&e.label, vec![
            ("a".into(), "skg:Entity".into()),
            ("skg:priorPresence".into(), number(e.prior_presence)),
        ]));
    }
    for a in kb.actions.values() {
        let mut pairs = vec![
            ("a".into(), "skg:Action".into()),
            ("skg:performedBy".into(), reference(&a.performed_by)),
            ("skg:actsOn".into(), reference(&a.acts_on)),
            ("skg:probGivenPresent".into(), number(a.prob_given_present)),
            ("skg:createsSignal".into(), reference(&a.creates_signal)),
        ];
        if !a.room_weights.is_empty() {
            let items: Vec<String> = a
                .room_weights
                .iter()
                .map(|(room, w)| format!("{} {}", reference(room), number(*w)))
                .collect();
            pairs.push(("skg:roomWeights".into(), format!("( {} )", items.join(" "))));
        }
        add(&a.id, with_label(&a.label, pairs));
    }
    for s in kb.signals.values() {
        add(&s.id, with_label(&s.label, vec![
            ("a".into(), "skg:Signal".into()),
            ("skg:signalClass".into(), reference(&s.signal_class)),
            ("skg:sourceLevel".into(), number(s.source_level)),
            ("skg:attenuation".into(), reference(&s.attenuation)),
        ]));
    }
    for c in kb.signal_classes.values() {
        let mut pairs = vec![("a".into(), "skg:SignalClass".into())];
        if let Some(b) = &c.broader {
            pairs.push(("skos:broader".into(), reference(b)));
        }
        add(&c.id, with_label(&c.label, pairs));
    }
    for law in kb.attenuation_laws.values() {
        add(&law.id, with_label(&law.label, vec![
            ("a".into(), "skg:AttenuationLaw".into()),
            ("skg:lawKind".into(), string(law.kind.as_str())),
            ("skg:referenceDistance".into(), number(law.reference_distance)),
        ]));
    }
    for c in kb.classifiers.values() {
        let mut pairs = vec![
            ("a".into(), "skg:Classifier".into()),
            ("skg:truePositiveRate".into(), number(c.true_positive_rate)),
            ("skg:falsePositiveRate".into(), number(c.false_positive_rate)),
        ];
        pairs.extend(
            c.detects_classes
                .iter()
                .map(|class| ("skg:detectsClass".to_string(), reference(class))),
        );
        if let Some(n) = c.class_count {
            pairs.push(("skg:classCount".into(), n.to_string()));
        }
        add(&c.id, with_label(&c.label, pairs));
    }
    for s in kb.sensors.values() {
        add(&s.id, with_label(&s.label, vec![
            ("a".into(), "sosa:Sensor".into()),
            ("skg:position".into(), point(s.position)),
            ("sosa:implements".into(), reference(&s.classifier)),
            ("skg:detectionThreshold".into(), number(s.detection_threshold)),
            ("skg:detectionSlope".into(), number(s.detection_slope)),
        ]));
    }
    for r in kb.rooms.values() {
        let mut pairs = vec![
            ("a".into(), "rec:Room".into()),
            ("skg:centroid".into(), point(r.centroid)),
        ];
        pairs.extend(
            r.contains_assets
                .iter()
                .map(|asset| ("skg:containsAsset".to_string(), reference(asset))),
        );
        add(&r.id, with_label(&r.label, pairs));
    }
    for t in kb.asset_types.values() {
        add(&t.id, with_label(&t.label, vec![("a".into(), "skg:AssetType".into())]));
    }
    for b in kb.barriers.values() {
        let (p, q) = b.segment;
        add(&b.id, with_label(&b.label, vec![
            ("a".into(), "skg:Barrier".into()),
            (
                "skg:segment".into(),
                format!("( {} {} {} {} )", number(p.x), number(p.y), number(q.x), number(q.y)),
            ),
            ("skg:attenuationDb".into(), number(b.attenuation)),
        ]));
    }
    for t in &kb.unknown_triples {
        let predicate = if t.predicate.is_rdf_type() {
            "a".to_string()
        } else {
            t.predicate.to_string()
        };
        add(&t.subject, vec![(predicate, term(&t.object))]);
    }

    for (subject, mut pairs) in subjects {
        pairs.sort();
        pairs.dedup();
        let _ = write!(out, "\nskg:{subject}");
        for (i, (p, o)) in pairs.iter().enumerate() {
            let sep = if i == 0 { " " } else { " ;\n    " };
            let _ = write!(out, "{sep}{p} {o}");
        }
        out.push_str(" .\n");
    }
    out
}

fn with_label(label: &str, mut pairs: Vec<(String, String)>) -> Vec<(String, String)> {
    if !label.is_empty() {
        pairs.push(("skos:prefLabel".into(), string(label)));
    }
    pairs
}

fn reference(id: &str) -> String {
    format!("skg:{id}")
}

fn number(v: f64) -> String {
    format!("{v:?}")
}

fn point(p: Point2D) -> String {
    format!("( {} {} )", number(p.x), number(p.y))
}

fn string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn term(t: &Term) -> String {
    match t {
        Term::Name(n) => n.to_string(),
        Term::Str(s) => string(s),
        Term::Number(n) => number(*n),
        Term::Bool(b) => b.to_string(),
        Term::List(items) => {
            let inner: Vec<String> = items.iter().map(term).collect();
            if inner.is_empty() {
                "( )".into()
            } else {
                format!("( {} )", inner.join(" "))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_kb_is_only_prefixes() {
        let text = serialize_kb(&KnowledgeBase::default());
        assert!(text.lines().all(|l| l.starts_with("@prefix ")));
        assert_eq!(text.lines().count(), 6);
        assert!(parse_kb(&text).unwrap().kb.is_empty());
    }

    #[test]
    fn strings_and_extras_round_trip() {
        let src = "@prefix ex: <http://example.org/x#> .
            skg:e a skg:Entity ; skg:priorPresence 0.25 ; skos:prefLabel \"The \\\"quoted\\\"\\nlabel\" ;
              skg:note ( ex:thing 3 true \"s\" ) .
            ex:odd a ex:Thing .";
        let first = parse_kb(src).unwrap();
        let text = serialize_kb(&first.kb);
        let second = parse_kb(&text).unwrap();
        assert_eq!(first.kb, second.kb);
        assert_eq!(serialize_kb(&second.kb), text);
        assert_eq!(second.kb.entities["e"].label, "The \"quoted\"\nlabel");
    }
}
