#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use signalkg::compiler::{compile, BayesianNetwork, NodeId, NodeKind};
use signalkg::inference::Evidence;
use signalkg::kgmodel::*;
use signalkg::propagation::Point2D;
use signalkg::{bundled, service};

pub fn example_kb() -> KnowledgeBase {
    service::load_kb(bundled::EXAMPLE_KB).unwrap().0
}

pub fn chain_kb() -> KnowledgeBase {
    service::load_kb(bundled::CHAIN_KB).unwrap().0
}

pub fn glass_evidence() -> Evidence {
    Evidence::new().with(NodeId::detected("mic-1", "glass"), true)
}

fn point(rng: &mut ChaCha8Rng, extent: f64) -> Point2D {
    Point2D::new(rng.random_range(0.0..extent), rng.random_range(0.0..extent))
}

fn label(rng: &mut ChaCha8Rng, stem: &str) -> String {
    match rng.random_range(0..4) {
        0 => String::new(),
        1 => format!("{stem} \"quoted\""),
        2 => format!("{stem}\\with\ttabs\nand lines"),
        _ => format!("{stem} é ünïcode"),
    }
}

/// A small, valid knowledge base built from `seed`: up to 3 entities with
/// one action each, up to 3 rooms, up to 2 sensors sharing one classifier,
/// a two-level class hierarchy and up to 2 walls.
pub fn random_kb(seed: u64) -> KnowledgeBase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rng = &mut rng;
    let mut kb = KnowledgeBase::default();

    for (id, broader) in [("sound", None), ("k0", Some("sound")), ("k1", Some("sound"))] {
        kb.signal_classes.insert(
            id.into(),
            SignalClass {
                id: id.into(),
                label: label(rng, id),
                broader: broader.map(str::to_string),
            },
        );
    }
    kb.attenuation_laws.insert(
        "law".into(),
        AttenuationLaw {
            id: "law".into(),
            label: String::new(),
            kind: if rng.random_bool(0.8) {
                AttenuationKind::InverseSquare
            } else {
                AttenuationKind::None
            },
            reference_distance: rng.random_range(0.5..2.0),
        },
    );
    for i in 0..2 {
        let id = format!("s{i}");
        kb.signals.insert(
            id.clone(),
            SignalSpec {
                id,
                label: label(rng, "signal"),
                signal_class: format!("k{}", rng.random_range(0..2)),
                source_level: rng.random_range(55.0..95.0),
                attenuation: "law".into(),
            },
        );
    }
    for i in 0..2 {
        let id = format!("asset{i}");
        kb.asset_types.insert(id.clone(), AssetType { id, label: String::new() });
    }
    let n_rooms = rng.random_range(1..=3);
    for i in 0..n_rooms {
        let id = format!("r{i}");
        let mut assets = BTreeSet::new();
        for a in 0..2 {
            if rng.random_bool(0.6) {
                assets.insert(format!("asset{a}"));
            }
        }
        kb.rooms.insert(
            id.clone(),
            Room {
                id,
                label: label(rng, "room"),
                centroid: point(rng, 20.0),
                contains_assets: assets,
            },
        );
    }
    let n_entities = rng.random_range(1..=3);
    for i in 0..n_entities {
        let id = format!("e{i}");
        kb.entities.insert(
            id.clone(),
            EntityKind {
                id: id.clone(),
                label: label(rng, "entity"),
                prior_presence: rng.random_range(0.05..0.95),
            },
        );
        let action = format!("act{i}");
        let mut room_weights = BTreeMap::new();
        if rng.random_bool(0.3) {
            room_weights.insert(format!("r{}", rng.random_range(0..n_rooms)), rng.random_range(0.5..3.0));
        }
        kb.actions.insert(
            action.clone(),
            ActionSpec {
                id: action,
                label: label(rng, "action"),
                performed_by: id,
                acts_on: format!("asset{}", rng.random_range(0..2)),
                prob_given_present: rng.random_range(0.1..0.95),
                creates_signal: format!("s{}", rng.random_range(0..2)),
                room_weights,
            },
        );
    }
    let mut classes: BTreeSet<String> = ["sound", "k0", "k1"]
        .into_iter()
        .filter(|_| rng.random_bool(0.5))
        .map(str::to_string)
        .collect();
    if classes.is_empty() {
        classes.insert("sound".into());
    }
    kb.classifiers.insert(
        "clf".into(),
        ClassifierSpec {
            id: "clf".into(),
            label: label(rng, "classifier"),
            detects_classes: classes,
            true_positive_rate: rng.random_range(0.6..0.99),
            false_positive_rate: rng.random_range(0.01..0.2),
            class_count: rng.random_bool(0.5).then(|| rng.random_range(2..600)),
        },
    );
    for i in 0..rng.random_range(1..=2) {
        let id = format!("m{i}");
        kb.sensors.insert(
            id.clone(),
            SensorSpec {
                id,
                label: label(rng, "sensor"),
                position: point(rng, 20.0),
                classifier: "clf".into(),
                detection_threshold: rng.random_range(30.0..70.0),
                detection_slope: rng.random_range(2.0..8.0),
            },
        );
    }
    for i in 0..rng.random_range(0..=2) {
        let id = format!("w{i}");
        kb.barriers.insert(
            id.clone(),
            Barrier {
                id,
                label: String::new(),
                segment: (point(rng, 20.0), point(rng, 20.0)),
                attenuation: rng.random_range(0.0..20.0),
            },
        );
    }
    kb
}

/// Random knowledge bases whose networks have between 1 and `max_nodes`
/// nodes, with the seeds that produced them.
pub fn random_networks(count: usize, max_nodes: usize, first_seed: u64) -> Vec<(u64, KnowledgeBase, BayesianNetwork)> {
    let mut out = Vec::new();
    let mut seed = first_seed;
    while out.len() < count {
        let kb = random_kb(seed);
        assert_eq!(error_count(&validate(&kb)), 0, "generator produced an invalid KB (seed {seed})");
        let bn = compile(&kb).unwrap();
        if !bn.is_empty() && bn.len() <= max_nodes {
            out.push((seed, kb, bn));
        }
        seed += 1;
    }
    out
}

/// Evidence on a seeded random subset of the detected nodes.
pub fn random_detected_evidence(bn: &BayesianNetwork, seed: u64) -> Evidence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut ev = Evidence::new();
    for id in bn.ids().filter(|id| id.kind == NodeKind::Detected) {
        if rng.random_bool(0.7) {
            ev = ev.with(id.clone(), rng.random_bool(0.5));
        }
    }
    ev
}
