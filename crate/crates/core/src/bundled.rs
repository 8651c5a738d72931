//! Example files shipped with the crate.

/// Two entities, two actions, one microphone; see the file header.
pub const EXAMPLE_KB: &str = include_str!("../data/example.ttl");

/// One entity, one action, one room, one signal, one sensor.
pub const CHAIN_KB: &str = include_str!("../data/chain.ttl");

/// mic-1 reports class `glass`.
pub const GLASS_EVIDENCE: &str = include_str!("../data/glass-evidence.json");
