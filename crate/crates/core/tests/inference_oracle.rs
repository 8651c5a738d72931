mod common;

use signalkg::compiler::{compile, NodeId, NodeKind};
use signalkg::inference::*;
use signalkg::kgmodel::KnowledgeBase;
use signalkg::observations::parse_observations;
use signalkg::{bundled, service};

/// Closed-form posterior for the bundled scene, derived by hand from the
/// compile rules: x = P(break-window heard), y = P(drop-tray heard), both
/// marginalised over their entity.
fn closed_form_attacker_posterior() -> f64 {
    let sigma = |z: f64| 1.0 / (1.0 + (-z).exp());
    let q1 = sigma((90.0 - 20.0 * 5f64.sqrt().log10() - 60.0) / 4.0);
    let q2 = sigma((80.0 - 20.0 * 53f64.sqrt().log10() - 15.0 - 60.0) / 4.0);
    let (x, y) = (0.9 * q1, 0.5 * 0.2 * q2);
    let (tpr, fpr) = (0.95, 0.02);
    let present = tpr * (1.0 - (1.0 - x) * (1.0 - y)) + fpr * (1.0 - x) * (1.0 - y);
    let absent = tpr * y + fpr * (1.0 - y);
    present / (present + absent)
}

#[test]
fn bundled_scene_matches_closed_form() {
    let bn = compile(&common::example_kb()).unwrap();
    let post = exact_enumeration(&bn, &common::glass_evidence()).unwrap();
    let attacker = post.get(&NodeId::entity("attacker")).unwrap();
    assert!((attacker - closed_form_attacker_posterior()).abs() < 1e-12);
    assert!((attacker - 0.97).abs() <= 0.01);
}

#[test]
fn sampler_agrees_with_enumeration_on_bundled_scene() {
    let bn = compile(&common::example_kb()).unwrap();
    for evidence in [Evidence::new(), common::glass_evidence()] {
        let exact = exact_enumeration(&bn, &evidence).unwrap();
        let lw = likelihood_weighting(&bn, &evidence, &SamplerConfig::new(20_000, 42)).unwrap();
        assert!(lw.max_abs_diff(&exact) <= 0.02, "{}", lw.max_abs_diff(&exact));
        for (id, v) in &evidence.assignments {
            assert_eq!(lw.get(id), Some(f64::from(u8::from(*v))));
        }
    }
}

#[test]
fn empty_evidence_gives_priors() {
    let kb = common::chain_kb();
    let bn = compile(&kb).unwrap();
    let post = likelihood_weighting(&bn, &Evidence::new(), &SamplerConfig::new(20_000, 1)).unwrap();
    assert!((post.get(&NodeId::entity("attacker")).unwrap() - 0.5).abs() <= 0.02);
    assert_eq!(post.effective_sample_size, 20_000.0);
    let exact = exact_enumeration(&bn, &Evidence::new()).unwrap();
    assert_eq!(exact.get(&NodeId::entity("attacker")), Some(0.5));
}

#[test]
fn randomized_oracle_agreement() {
    for (seed, _, bn) in common::random_networks(10, 12, 500) {
        let ev = common::random_detected_evidence(&bn, seed);
        let exact = exact_enumeration(&bn, &ev).unwrap();
        let lw = likelihood_weighting(&bn, &ev, &SamplerConfig::new(50_000, seed).with_workers(2)).unwrap();
        let err = lw.max_abs_diff(&exact);
        assert!(err <= 0.03, "seed {seed}: max error {err}");
    }
}

fn moved_sensor(kb: &KnowledgeBase, x: f64) -> KnowledgeBase {
    let mut kb = kb.clone();
    kb.sensors.get_mut("mic-1").unwrap().position.x = x;
    kb
}

#[test]
fn detection_marginal_falls_with_distance() {
    let kb = common::chain_kb();
    let mut last = f64::INFINITY;
    for step in 0..30 {
        let bn = compile(&moved_sensor(&kb, 2.0 + step as f64 * 5.0)).unwrap();
        let p = exact_enumeration(&bn, &Evidence::new())
            .unwrap()
            .get(&NodeId::detected("mic-1", "glass"))
            .unwrap();
        assert!(p <= last + 1e-15, "step {step}: {p} > {last}");
        last = p;
    }
}

#[test]
fn worker_count_and_reruns_are_bit_identical() {
    let bn = compile(&common::example_kb()).unwrap();
    let ev = common::glass_evidence();
    let base = likelihood_weighting(&bn, &ev, &SamplerConfig::new(30_000, 5)).unwrap();
    for workers in [1, 2, 4, 7] {
        let again = likelihood_weighting(&bn, &ev, &SamplerConfig::new(30_000, 5).with_workers(workers)).unwrap();
        assert_eq!(again, base);
    }
}

#[test]
fn observation_files_map_to_evidence() {
    let kb = common::example_kb();
    let bn = compile(&kb).unwrap();
    let records = parse_observations(bundled::GLASS_EVIDENCE).unwrap();
    assert_eq!(evidence_from_observations(&records, &bn, &kb).unwrap(), common::glass_evidence());
    assert!(evidence_from_observations(&[], &bn, &kb).unwrap().is_empty());

    let conflicting = parse_observations(
        r#"{"observations": [
            {"sensor": "mic-1", "class": "glass", "result": true},
            {"sensor": "mic-1", "class": "glass", "result": false}]}"#,
    )
    .unwrap();
    let err = evidence_from_observations(&conflicting, &bn, &kb).unwrap_err();
    assert_eq!(err.code(), "conflicting-evidence");

    let unknown = parse_observations(r#"{"observations": [{"sensor": "cam-9", "class": "glass", "result": true}]}"#).unwrap();
    assert_eq!(evidence_from_observations(&unknown, &bn, &kb).unwrap_err().code(), "unknown-sensor");
}

#[test]
fn impossible_evidence_fails_in_both_engines() {
    let mut kb = common::chain_kb();
    kb.entities.get_mut("attacker").unwrap().prior_presence = 0.0;
    let c = kb.classifiers.get_mut("sound-classifier").unwrap();
    c.false_positive_rate = 0.0;
    let records = parse_observations(bundled::GLASS_EVIDENCE).unwrap();
    let lw = service::infer(&kb, &records, &service::InferOptions::default()).unwrap_err();
    assert_eq!(lw.code(), "zero-weight");
    let exact = service::infer(&kb, &records, &service::InferOptions { exact: true, ..Default::default() });
    assert_eq!(exact.unwrap_err().code(), "zero-probability");
}

#[test]
fn detected_nodes_exist_for_every_random_network() {
    for (seed, _, bn) in common::random_networks(20, 12, 900) {
        let ev = common::random_detected_evidence(&bn, seed);
        assert!(ev.assignments.keys().all(|id| id.kind == NodeKind::Detected));
    }
}
