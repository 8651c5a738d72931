use std::collections::{BTreeMap, BTreeSet};

use super::*;

/// Checks every record invariant plus cross-record consistency. The result
/// is empty exactly when the knowledge base is fit for compilation and has
/// no warnings either.
pub fn validate(kb: &KnowledgeBase) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    duplicate_ids(kb, &mut out);

    let unresolved = |out: &mut Vec<Diagnostic>, subject: &str, what: &str, id: &str| {
        out.push(Diagnostic::error(
            "unresolved-ref",
            subject,
            format!("{what} `{id}` does not exist"),
        ));
    };

    for e in kb.entities.values() {
        probability(&mut out, &e.id, "prior_presence", e.prior_presence);
    }

    for a in kb.actions.values() {
        probability(&mut out, &a.id, "prob_given_present", a.prob_given_present);
        if !kb.entities.contains_key(&a.performed_by) {
            unresolved(&mut out, &a.id, "entity", &a.performed_by);
        }
        if !kb.asset_types.contains_key(&a.acts_on) {
            unresolved(&mut out, &a.id, "asset type", &a.acts_on);
        }
        if !kb.signals.contains_key(&a.creates_signal) {
            unresolved(&mut out, &a.id, "signal", &a.creates_signal);
        }
        for (room, w) in &a.room_weights {
            if !kb.rooms.contains_key(room) {
                unresolved(&mut out, &a.id, "room", room);
            }
            if !w.is_finite() || *w < 0.0 {
                out.push(Diagnostic::error(
                    "weight-range",
                    &a.id,
                    format!("room weight {w} for `{room}` must be finite and >= 0"),
                ));
            }
        }
        let rooms = eligible_rooms(&a.id, kb).unwrap_or_default();
        if rooms.is_empty() {
            out.push(Diagnostic::warning(
                "no-eligible-room",
                &a.id,
                format!("no room contains asset type `{}`", a.acts_on),
            ));
        } else if !a.room_weights.is_empty() {
            let total: f64 = rooms
                .iter()
                .map(|r| a.room_weights.get(r).copied().unwrap_or(1.0))
                .sum();
            if !(total > 0.0) {
                out.push(Diagnostic::error(
                    "weight-range",
                    &a.id,
                    "room weights over eligible rooms sum to zero",
                ));
            }
        }
    }

    for s in kb.signals.values() {
        if !s.source_level.is_finite() {
            out.push(Diagnostic::error("non-finite", &s.id, "source_level must be finite"));
        }
        if !kb.signal_classes.contains_key(&s.signal_class) {
            unresolved(&mut out, &s.id, "signal class", &s.signal_class);
        }
        if !kb.attenuation_laws.contains_key(&s.attenuation) {
            unresolved(&mut out, &s.id, "attenuation law", &s.attenuation);
        }
    }

    for c in kb.signal_classes.values() {
        if let Some(b) = &c.broader {
            if !kb.signal_classes.contains_key(b) {
                unresolved(&mut out, &c.id, "broader class", b);
            }
        }
    }
    class_cycles(kb, &mut out);

    for law in kb.attenuation_laws.values() {
        if !(law.reference_distance > 0.0) || !law.reference_distance.is_finite() {
            out.push(Diagnostic::error(
                "law-range",
                &law.id,
                format!("reference_distance {} must be finite and > 0", law.reference_distance),
            ));
        }
    }

    for c in kb.classifiers.values() {
        let tpr_ok = probability(&mut out, &c.id, "true_positive_rate", c.true_positive_rate);
        let fpr_ok = probability(&mut out, &c.id, "false_positive_rate", c.false_positive_rate);
        if tpr_ok && fpr_ok && c.false_positive_rate >= c.true_positive_rate {
            out.push(Diagnostic::error(
                "rate-order",
                &c.id,
                format!(
                    "false_positive_rate {} must be below true_positive_rate {}",
                    c.false_positive_rate, c.true_positive_rate
                ),
            ));
        }
        for class in &c.detects_classes {
            if !kb.signal_classes.contains_key(class) {
                unresolved(&mut out, &c.id, "signal class", class);
            }
        }
    }

    for s in kb.sensors.values() {
        if !s.position.is_finite() || !s.detection_threshold.is_finite() {
            out.push(Diagnostic::error(
                "non-finite",
                &s.id,
                "position and detection_threshold must be finite",
            ));
        }
        if !(s.detection_slope > 0.0) || !s.detection_slope.is_finite() {
            out.push(Diagnostic::error(
                "slope-range",
                &s.id,
                format!("detection_slope {} must be finite and > 0", s.detection_slope),
            ));
        }
        if !kb.classifiers.contains_key(&s.classifier) {
            unresolved(&mut out, &s.id, "classifier", &s.classifier);
        }
    }

    for r in kb.rooms.values() {
        if !r.centroid.is_finite() {
            out.push(Diagnostic::error("non-finite", &r.id, "centroid must be finite"));
        }
        for asset in &r.contains_assets {
            if !kb.asset_types.contains_key(asset) {
                unresolved(&mut out, &r.id, "asset type", asset);
            }
        }
    }

    for b in kb.barriers.values() {
        let (p, q) = b.segment;
        if !p.is_finite() || !q.is_finite() {
            out.push(Diagnostic::error("non-finite", &b.id, "segment endpoints must be finite"));
        } else if p == q {
            out.push(Diagnostic::error(
                "degenerate-barrier",
                &b.id,
                "segment endpoints must be distinct",
            ));
        }
        if !(b.attenuation >= 0.0) || !b.attenuation.is_finite() {
            out.push(Diagnostic::error(
                "attenuation-range",
                &b.id,
                format!("attenuation {} must be finite and >= 0", b.attenuation),
            ));
        }
    }

    out
}

fn probability(out: &mut Vec<Diagnostic>, subject: &str, field: &str, p: f64) -> bool {
    if (0.0..=1.0).contains(&p) {
        return true;
    }
    out.push(Diagnostic::error(
        "prob-range",
        subject,
        format!("{field} {p} is outside [0, 1]"),
    ));
    false
}

fn duplicate_ids(kb: &KnowledgeBase, out: &mut Vec<Diagnostic>) {
    let keyed: [(Vec<&String>, &str); 10] = [
        (kb.entities.keys().collect(), "entity"),
        (kb.actions.keys().collect(), "action"),
        (kb.signals.keys().collect(), "signal"),
        (kb.signal_classes.keys().collect(), "signal class"),
        (kb.attenuation_laws.keys().collect(), "attenuation law"),
        (kb.classifiers.keys().collect(), "classifier"),
        (kb.sensors.keys().collect(), "sensor"),
        (kb.rooms.keys().collect(), "room"),
        (kb.asset_types.keys().collect(), "asset type"),
        (kb.barriers.keys().collect(), "barrier"),
    ];
    let mut owners: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (ids, kind) in &keyed {
        for id in ids {
            owners.entry(id.as_str()).or_default().push(kind);
        }
    }
    for (id, kinds) in owners {
        if kinds.len() > 1 {
            out.push(Diagnostic::error(
                "duplicate-id",
                id,
                format!("id is used by several records: {}", kinds.join(", ")),
            ));
        }
    }
}

/// Reports each broader-link cycle once, against its smallest member id.
fn class_cycles(kb: &KnowledgeBase, out: &mut Vec<Diagnostic>) {
    let mut done: BTreeSet<&str> = BTreeSet::new();
    for start in kb.signal_classes.keys() {
        let mut path: Vec<&str> = Vec::new();
        let mut current = Some(start.as_str());
        while let Some(id) = current {
            if done.contains(id) {
                break;
            }
            if let Some(pos) = path.iter().position(|p| *p == id) {
                let cycle = &path[pos..];
                let first = cycle.iter().position(|c| c == cycle.iter().min().unwrap()).unwrap();
                let mut members: Vec<&str> =
                    cycle[first..].iter().chain(&cycle[..first]).copied().collect();
                members.push(members[0]);
                out.push(Diagnostic::error(
                    "class-cycle",
                    members[0],
                    format!("broader links form a cycle: {}", members.join(" -> ")),
                ));
                break;
            }
            path.push(id);
            current = kb
                .signal_classes
                .get(id)
                .and_then(|c| c.broader.as_deref())
                .filter(|b| kb.signal_classes.contains_key(*b));
        }
        done.extend(path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgmodel::parse_kb;

    const BASE: &str = r#"
        skg:attacker a skg:Entity ; skg:priorPresence 0.5 .
        skg:window a skg:AssetType .
        skg:lobby a rec:Room ; skg:centroid ( 0 0 ) ; skg:containsAsset skg:window .
        skg:glass a skg:SignalClass .
        skg:isl a skg:AttenuationLaw ; skg:lawKind "inverse-square" ; skg:referenceDistance 1 .
        skg:bang a skg:Signal ; skg:signalClass skg:glass ; skg:sourceLevel 90 ; skg:attenuation skg:isl .
        skg:smash a skg:Action ; skg:performedBy skg:attacker ; skg:actsOn skg:window ;
            skg:probGivenPresent 0.5 ; skg:createsSignal skg:bang .
    "#;

    fn codes(src: &str) -> Vec<String> {
        let kb = parse_kb(src).unwrap().kb;
        validate(&kb).into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn clean_kb_has_no_diagnostics() {
        assert!(codes(BASE).is_empty());
    }

    #[test]
    fn out_of_range_prior() {
        let src = BASE.replace("skg:priorPresence 0.5", "skg:priorPresence 1.5");
        assert_eq!(codes(&src), ["prob-range"]);
    }

    #[test]
    fn two_class_cycle_reported_once() {
        let src = format!(
            "{BASE}\nskg:a a skg:SignalClass ; skos:broader skg:b .\nskg:b a skg:SignalClass ; skos:broader skg:a ."
        );
        let kb = parse_kb(&src).unwrap().kb;
        let diags = validate(&kb);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "class-cycle");
        assert_eq!(diags[0].subject, "a");
        assert_eq!(diags[0].message, "broader links form a cycle: a -> b -> a");
    }

    #[test]
    fn tail_into_cycle_and_self_loop() {
        let src = format!(
            "{BASE}\nskg:t a skg:SignalClass ; skos:broader skg:c1 .
             skg:c1 a skg:SignalClass ; skos:broader skg:c2 .
             skg:c2 a skg:SignalClass ; skos:broader skg:c1 .
             skg:s a skg:SignalClass ; skos:broader skg:s ."
        );
        assert_eq!(codes(&src), ["class-cycle", "class-cycle"]);
    }

    #[test]
    fn action_without_room_is_a_warning() {
        let src = BASE.replace("skg:containsAsset skg:window", "");
        let kb = parse_kb(&src).unwrap().kb;
        let diags = validate(&kb);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "no-eligible-room");
        assert_eq!(diags[0].severity, Severity::Warning);
    }

    #[test]
    fn classifier_rates_must_be_ordered() {
        let src = format!(
            "{BASE}\nskg:clf a skg:Classifier ; skg:detectsClass skg:glass ;
                skg:truePositiveRate 0.2 ; skg:falsePositiveRate 0.3 ."
        );
        assert_eq!(codes(&src), ["rate-order"]);
    }

    #[test]
    fn geometry_and_law_ranges() {
        let src = format!(
            "{BASE}\nskg:w a skg:Barrier ; skg:segment ( 1 1 1 1 ) ; skg:attenuationDb -3 .
             skg:flat a skg:AttenuationLaw ; skg:lawKind \"none\" ; skg:referenceDistance 0 .
             skg:clf a skg:Classifier ; skg:truePositiveRate 0.9 ; skg:falsePositiveRate 0.1 .
             skg:mic a sosa:Sensor ; skg:position ( 0 0 ) ; sosa:implements skg:clf ;
                skg:detectionThreshold 50 ; skg:detectionSlope 0 ."
        );
        assert_eq!(
            codes(&src),
            ["law-range", "slope-range", "degenerate-barrier", "attenuation-range"]
        );
    }

    #[test]
    fn duplicate_ids_across_maps() {
        let mut kb = parse_kb(BASE).unwrap().kb;
        kb.asset_types.insert(
            "lobby".into(),
            AssetType {
                id: "lobby".into(),
                label: String::new(),
            },
        );
        let diags = validate(&kb);
        assert_eq!(diags[0].code, "duplicate-id");
        assert_eq!(diags[0].subject, "lobby");
    }

    #[test]
    fn validation_is_pure() {
        let kb = parse_kb(&BASE.replace("0.5 .", "7 .")).unwrap().kb;
        assert_eq!(validate(&kb), validate(&kb.clone()));
    }
}
