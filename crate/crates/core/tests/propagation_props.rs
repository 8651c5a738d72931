use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use signalkg::kgmodel::{AttenuationKind, AttenuationLaw, Barrier, SensorSpec};
use signalkg::propagation::*;

fn law(reference: f64) -> AttenuationLaw {
    AttenuationLaw {
        id: "law".into(),
        label: String::new(),
        kind: AttenuationKind::InverseSquare,
        reference_distance: reference,
    }
}

fn wall(id: &str, a: Point2D, b: Point2D, db: f64) -> Barrier {
    Barrier {
        id: id.into(),
        label: String::new(),
        segment: (a, b),
        attenuation: db,
    }
}

fn sensor(threshold: f64, slope: f64) -> SensorSpec {
    SensorSpec {
        id: "m".into(),
        label: String::new(),
        position: Point2D::new(0.0, 0.0),
        classifier: "c".into(),
        detection_threshold: threshold,
        detection_slope: slope,
    }
}

/// Independent crossing test: sample the source-to-sensor path densely and
/// look for a sign change of the wall's line function while the sample is
/// within the wall's extent. Only used on configurations kept clear of
/// touching cases.
fn brute_force_crosses(p: Point2D, q: Point2D, w: &Barrier) -> bool {
    let (a, b) = w.segment;
    let side = |t: f64| {
        let x = p.x + (q.x - p.x) * t;
        let y = p.y + (q.y - p.y) * t;
        let s = (b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x);
        let len2 = (b.x - a.x).powi(2) + (b.y - a.y).powi(2);
        let along = ((x - a.x) * (b.x - a.x) + (y - a.y) * (b.y - a.y)) / len2;
        (s, along)
    };
    let steps = 20_000;
    let (mut prev, _) = side(0.0);
    for k in 1..=steps {
        let (s, along) = side(k as f64 / steps as f64);
        if prev.signum() != s.signum() && (0.0..=1.0).contains(&along) {
            return true;
        }
        prev = s;
    }
    false
}

/// Distance from `c` to the segment `ab`.
fn point_segment_distance(c: Point2D, a: Point2D, b: Point2D) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let t = (((c.x - a.x) * dx + (c.y - a.y) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    distance(c, Point2D::new(a.x + t * dx, a.y + t * dy))
}

#[test]
fn crossings_match_brute_force_on_random_walls() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    let mut crossed = 0;
    while checked < 200 {
        let mut pt = || Point2D::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
        let (p, q, a, b) = (pt(), pt(), pt(), pt());
        // keep away from grazing contacts, where sampling cannot decide
        let margin = 0.05;
        if point_segment_distance(a, p, q) < margin
            || point_segment_distance(b, p, q) < margin
            || point_segment_distance(p, a, b) < margin
            || point_segment_distance(q, a, b) < margin
            || distance(a, b) < 0.5
        {
            continue;
        }
        let w = wall("w", a, b, 10.0);
        let expected = brute_force_crosses(p, q, &w);
        let got = crossings(p, q, std::slice::from_ref(&w));
        assert_eq!(got.count == 1, expected, "p={p:?} q={q:?} wall={a:?}-{b:?}");
        crossed += usize::from(expected);
        checked += 1;
    }
    assert!(crossed > 20 && crossed < 180, "degenerate sample: {crossed} crossings");
}

#[test]
fn reference_values() {
    let w = wall("w", Point2D::new(5.0, -1.0), Point2D::new(5.0, 1.0), 10.0);
    let level = received_level(80.0, &law(1.0), 10.0, &[&w]);
    assert_eq!(level, LevelDb(50.0));
    assert_eq!(received_level(80.0, &law(1.0), 10.0, &[]), LevelDb(60.0));
    assert_eq!(detection_prob(LevelDb(55.0), &sensor(55.0, 3.0)), 0.5);
    assert_eq!(detection_prob(LevelDb::BLOCKED, &sensor(55.0, 3.0)), 0.0);
}

proptest! {
    #[test]
    fn doubling_distance_loses_six_db(reference in 0.1f64..5.0, factor in 1.0f64..50.0, level in 0.0f64..120.0) {
        let d = reference * factor;
        let near = received_level(level, &law(reference), d, &[]).value();
        let far = received_level(level, &law(reference), 2.0 * d, &[]).value();
        prop_assert!((near - far - 20.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn level_never_increases_with_distance(d1 in 0.0f64..100.0, d2 in 0.0f64..100.0, reference in 0.1f64..5.0) {
        let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let a = received_level(70.0, &law(reference), near, &[]).value();
        let b = received_level(70.0, &law(reference), far, &[]).value();
        prop_assert!(b <= a);
    }

    #[test]
    fn crossings_are_symmetric(coords in prop::array::uniform8(-10.0f64..10.0)) {
        let [px, py, qx, qy, ax, ay, bx, by] = coords;
        let (p, q) = (Point2D::new(px, py), Point2D::new(qx, qy));
        let walls = [wall("w", Point2D::new(ax, ay), Point2D::new(bx, by), 5.0)];
        prop_assert_eq!(crossings(p, q, &walls).count, crossings(q, p, &walls).count);
    }

    #[test]
    fn detection_is_monotone_in_level(a in -50.0f64..150.0, b in -50.0f64..150.0, thr in 0.0f64..100.0, slope in 0.1f64..20.0) {
        let s = sensor(thr, slope);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (p_lo, p_hi) = (detection_prob(LevelDb(lo), &s), detection_prob(LevelDb(hi), &s));
        prop_assert!(p_lo <= p_hi);
        prop_assert!((0.0..=1.0).contains(&p_lo) && (0.0..=1.0).contains(&p_hi));
    }

    #[test]
    fn detection_at_threshold_is_half(thr in -100.0f64..200.0, slope in 0.01f64..50.0) {
        prop_assert!((detection_prob(LevelDb(thr), &sensor(thr, slope)) - 0.5).abs() < 1e-12);
    }
}
