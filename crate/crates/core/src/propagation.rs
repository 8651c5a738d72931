//! Signal propagation on a single-floor plan.
//!
//! Levels are in decibels on a relative scale: a signal's source level is
//! its level at the attenuation law's reference distance. Distance falloff
//! and wall losses subtract from it, and a sensor turns the received level
//! into a detection probability with a logistic curve.

use serde::{Deserialize, Serialize};

use crate::kgmodel::{AttenuationKind, AttenuationLaw, Barrier, SensorSpec};

/// Geometric tolerance in meters for segment intersection tests.
pub const GEOMETRY_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A signal level in decibels. `LevelDb::BLOCKED` (negative infinity) marks a
/// signal that cannot reach the receiver at all.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LevelDb(pub f64);

impl LevelDb {
    pub const BLOCKED: LevelDb = LevelDb(f64::NEG_INFINITY);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_blocked(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

pub fn distance(a: Point2D, b: Point2D) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Barriers crossed by the segment `src -> dst`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Crossings {
    pub count: usize,
    pub barrier_ids: Vec<String>,
}

/// Counts the barriers whose segment intersects `src -> dst`. Touching an
/// endpoint or running collinear along a barrier counts as a crossing.
pub fn crossings(src: Point2D, dst: Point2D, barriers: &[Barrier]) -> Crossings {
    if distance(src, dst) <= GEOMETRY_EPSILON {
        return Crossings::default();
    }
    let barrier_ids: Vec<String> = barriers
        .iter()
        .filter(|b| segments_intersect(src, dst, b.segment.0, b.segment.1))
        .map(|b| b.id.clone())
        .collect();
    Crossings {
        count: barrier_ids.len(),
        barrier_ids,
    }
}

/// Signed distance of `r` from the line through `p` and `q`, positive on the
/// left. Falls back to the distance from `p` for a degenerate `p == q`.
fn side(p: Point2D, q: Point2D, r: Point2D) -> f64 {
    let len = distance(p, q);
    let cross = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    if len <= GEOMETRY_EPSILON {
        return distance(p, r);
    }
    cross / len
}

fn sign(v: f64) -> i8 {
    if v > GEOMETRY_EPSILON {
        1
    } else if v < -GEOMETRY_EPSILON {
        -1
    } else {
        0
    }
}

/// `r` lies within the bounding box of `p`–`q` (inclusive, with tolerance).
fn within_box(p: Point2D, q: Point2D, r: Point2D) -> bool {
    r.x >= p.x.min(q.x) - GEOMETRY_EPSILON
        && r.x <= p.x.max(q.x) + GEOMETRY_EPSILON
        && r.y >= p.y.min(q.y) - GEOMETRY_EPSILON
        && r.y <= p.y.max(q.y) + GEOMETRY_EPSILON
}

pub(crate) fn segments_intersect(a: Point2D, b: Point2D, c: Point2D, d: Point2D) -> bool {
    let d1 = sign(side(a, b, c));
    let d2 = sign(side(a, b, d));
    let d3 = sign(side(c, d, a));
    let d4 = sign(side(c, d, b));

    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && within_box(a, b, c))
        || (d2 == 0 && within_box(a, b, d))
        || (d3 == 0 && within_box(c, d, a))
        || (d4 == 0 && within_box(c, d, b))
}

/// Level received at distance `d` from the source after crossing `crossed`.
///
/// Under an inverse-square law the level drops by `20·log10(d / d_ref)`,
/// with `d` clamped to at least the reference distance so that very short
/// paths never gain level.
pub fn received_level(
    source_level: f64,
    law: &AttenuationLaw,
    d: f64,
    crossed: &[&Barrier],
) -> LevelDb {
    let wall_loss: f64 = crossed.iter().map(|b| b.attenuation).sum();
    let falloff = match law.kind {
        AttenuationKind::InverseSquare => {
            let reference = law.reference_distance;
            20.0 * (d.max(reference) / reference).log10()
        }
        AttenuationKind::None => 0.0,
    };
    let level = source_level - falloff - wall_loss;
    if level.is_nan() {
        return LevelDb::BLOCKED;
    }
    LevelDb(level)
}

/// Logistic detection curve centred on the sensor's threshold.
pub fn detection_prob(level: LevelDb, sensor: &SensorSpec) -> f64 {
    if level.is_blocked() {
        return 0.0;
    }
    let z = level.0 - sensor.detection_threshold;
    if z == 0.0 {
        return 0.5;
    }
    logistic(z / sensor.detection_slope)
}

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
