//! Compile a knowledge base into a Boolean Bayesian network.
//!
//! The network has five layers, each depending only on the one before:
//!
//! ```text
//! entity(e) -> action(e, a, room) -> emitted(signal, room)
//!           -> received(signal, room, sensor) -> detected(sensor, class)
//! ```
//!
//! Nodes are ordered by layer and then by key, which is also a valid
//! topological order.

mod json;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kgmodel::{class_matches, eligible_rooms, error_count, validate, KnowledgeBase};
use crate::propagation::{crossings, detection_prob, distance, received_level};

pub use json::{export_bn, import_bn};

/// Upper bound on parents per node; CPTs are stored densely.
pub const MAX_PARENTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Entity,
    Action,
    Emitted,
    Received,
    Detected,
}

impl NodeKind {
    pub const ALL: [NodeKind; 5] = [
        NodeKind::Entity,
        NodeKind::Action,
        NodeKind::Emitted,
        NodeKind::Received,
        NodeKind::Detected,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Entity => "entity",
            NodeKind::Action => "action",
            NodeKind::Emitted => "emitted",
            NodeKind::Received => "received",
            NodeKind::Detected => "detected",
        }
    }

    /// Number of identifiers in a key of this kind.
    pub fn arity(self) -> usize {
        match self {
            NodeKind::Entity => 1,
            NodeKind::Emitted | NodeKind::Detected => 2,
            NodeKind::Action | NodeKind::Received => 3,
        }
    }
}

impl FromStr for NodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NodeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown node kind `{s}`")))
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Identity of a network node: its layer plus the ids that make it unique
/// within that layer. Renders as `kind(k1, k2, …)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub kind: NodeKind,
    pub key: Vec<String>,
}

impl NodeId {
    pub fn new<S: Into<String>>(kind: NodeKind, key: impl IntoIterator<Item = S>) -> Self {
        NodeId {
            kind,
            key: key.into_iter().map(Into::into).collect(),
        }
    }

    pub fn entity(entity: &str) -> Self {
        NodeId::new(NodeKind::Entity, [entity])
    }

    pub fn action(entity: &str, action: &str, room: &str) -> Self {
        NodeId::new(NodeKind::Action, [entity, action, room])
    }

    pub fn emitted(signal: &str, room: &str) -> Self {
        NodeId::new(NodeKind::Emitted, [signal, room])
    }

    pub fn received(signal: &str, room: &str, sensor: &str) -> Self {
        NodeId::new(NodeKind::Received, [signal, room, sensor])
    }

    pub fn detected(sensor: &str, class: &str) -> Self {
        NodeId::new(NodeKind::Detected, [sensor, class])
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind, self.key.join(", "))
    }
}

impl FromStr for NodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("malformed node id `{s}`"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let kind: NodeKind = s[..open].trim().parse()?;
        let key: Vec<String> = inner.split(',').map(|k| k.trim().to_string()).collect();
        if key.len() != kind.arity() || key.iter().any(|k| k.is_empty() || k.contains(['(', ')'])) {
            return Err(bad());
        }
        Ok(NodeId { kind, key })
    }
}

/// Human-readable label for a node; identical to its rendered id.
pub fn node_label(id: &NodeId) -> String {
    id.to_string()
}

/// Conditional probability table for a Boolean node.
///
/// `rows[r]` is `P(node = true | parents)` where bit `n-1-j` of `r` is the
/// value of parent `j`, so rows run from all-false to all-true with the
/// first parent most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub parents: Vec<usize>,
    pub rows: Vec<f64>,
}

impl Cpt {
    pub fn row_index(&self, values: &[bool]) -> usize {
        self.parents
            .iter()
            .fold(0, |acc, &p| (acc << 1) | values[p] as usize)
    }

    pub fn p_true(&self, values: &[bool]) -> f64 {
        self.rows[self.row_index(values)]
    }

    /// Parent assignment for row `r`, first parent first.
    pub fn assignment(&self, row: usize) -> Vec<bool> {
        let n = self.parents.len();
        (0..n).map(|j| row >> (n - 1 - j) & 1 == 1).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub cpt: Cpt,
}

/// A DAG of Boolean nodes with a precomputed topological order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BayesianNetwork {
    nodes: Vec<Node>,
    order: Vec<usize>,
    index: HashMap<NodeId, usize>,
}

impl BayesianNetwork {
    /// Builds a network, checking ids, CPT shapes, probabilities and
    /// acyclicity.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if node.id.key.len() != node.id.kind.arity() {
                return Err(Error::InvalidNetwork(format!("node `{}` has a malformed key", node.id)));
            }
            if index.insert(node.id.clone(), i).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate node `{}`", node.id)));
            }
        }
        for node in &nodes {
            let n = node.cpt.parents.len();
            if n > MAX_PARENTS {
                return Err(Error::TooManyParents {
                    node: node.id.to_string(),
                    parents: n,
                    max: MAX_PARENTS,
                });
            }
            if node.cpt.rows.len() != 1usize << n {
                return Err(Error::InvalidNetwork(format!(
                    "node `{}` has {} CPT rows, expected {}",
                    node.id,
                    node.cpt.rows.len(),
                    1usize << n
                )));
            }
            if let Some(p) = node.cpt.rows.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::InvalidNetwork(format!(
                    "node `{}` has probability {p} outside [0, 1]",
                    node.id
                )));
            }
            let mut seen = BTreeSet::new();
            for &p in &node.cpt.parents {
                if p >= nodes.len() || !seen.insert(p) {
                    return Err(Error::InvalidNetwork(format!(
                        "node `{}` has an invalid parent list",
                        node.id
                    )));
                }
            }
        }
        let order = topological_order(&nodes)?;
        Ok(BayesianNetwork { nodes, order, index })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    /// Node indices with every parent before its children.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    pub fn index_of(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &NodeId) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::unknown("node", id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.iter().map(|n| &n.id)
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.cpt.parents.len()).sum()
    }
}

/// Kahn's algorithm, taking the lowest ready index first so the order is
/// deterministic.
fn topological_order(nodes: &[Node]) -> Result<Vec<usize>> {
    let mut indegree: Vec<usize> = nodes.iter().map(|n| n.cpt.parents.len()).collect();
    let mut children = vec![Vec::new(); nodes.len()];
    for (i, n) in nodes.iter().enumerate() {
        for &p in &n.cpt.parents {
            children[p].push(i);
        }
    }
    let mut ready: BTreeSet<usize> = (0..nodes.len()).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() != nodes.len() {
        return Err(Error::InvalidNetwork("graph contains a cycle".into()));
    }
    Ok(order)
}

/// Compiles a validated knowledge base.
pub fn compile(kb: &KnowledgeBase) -> Result<BayesianNetwork> {
    compile_with_classes(kb, &BTreeSet::new())
}

/// Like [`compile`], additionally creating `detected(sensor, class)` nodes
/// for the given pairs (typically the classes mentioned in evidence) even
/// when no modelled signal matches them.
pub fn compile_with_classes(
    kb: &KnowledgeBase,
    extra: &BTreeSet<(String, String)>,
) -> Result<BayesianNetwork> {
    let errors = error_count(&validate(kb));
    if errors > 0 {
        return Err(Error::InvalidKb(errors));
    }
    for (sensor, class) in extra {
        let s = kb.sensor(sensor)?;
        if !kb.classifier_of(s)?.detects_classes.contains(class) {
            return Err(Error::unknown("class", class));
        }
    }

    // Every node with its parents by id; sorted into the final order below.
    let mut specs: BTreeMap<NodeId, (Vec<NodeId>, CptRule)> = BTreeMap::new();

    for e in kb.entities.values() {
        specs.insert(NodeId::entity(&e.id), (vec![], CptRule::Root(e.prior_presence)));
    }

    // (signal, room) -> creating action nodes
    let mut emitters: BTreeMap<(String, String), Vec<NodeId>> = BTreeMap::new();
    for a in kb.actions.values() {
        let rooms = eligible_rooms(&a.id, kb)?;
        let weights: Vec<f64> = rooms
            .iter()
            .map(|r| a.room_weights.get(r).copied().unwrap_or(1.0))
            .collect();
        let total: f64 = weights.iter().sum();
        for (room, w) in rooms.iter().zip(weights) {
            let id = NodeId::action(&a.performed_by, &a.id, room);
            let p = a.prob_given_present * w / total;
            specs.insert(
                id.clone(),
                (vec![NodeId::entity(&a.performed_by)], CptRule::IfParent(p)),
            );
            emitters
                .entry((a.creates_signal.clone(), room.clone()))
                .or_default()
                .push(id);
        }
    }

    let barriers = kb.barrier_list();
    // sensor -> (signal class, received node)
    let mut received_at: BTreeMap<&str, Vec<(&str, NodeId)>> = BTreeMap::new();
    for ((signal_id, room_id), actions) in emitters {
        let emitted = NodeId::emitted(&signal_id, &room_id);
        let signal = &kb.signals[&signal_id];
        let room = &kb.rooms[&room_id];
        let law = &kb.attenuation_laws[&signal.attenuation];
        for sensor in kb.sensors.values() {
            let classifier = kb.classifier_of(sensor)?;
            let mut detectable = false;
            for c in &classifier.detects_classes {
                detectable |= class_matches(&signal.signal_class, c, kb)?;
            }
            if !detectable {
                continue;
            }
            let d = distance(room.centroid, sensor.position);
            let crossed = crossings(room.centroid, sensor.position, &barriers);
            let crossed: Vec<_> = crossed
                .barrier_ids
                .iter()
                .map(|id| &kb.barriers[id])
                .collect();
            let level = received_level(signal.source_level, law, d, &crossed);
            let id = NodeId::received(&signal_id, &room_id, &sensor.id);
            specs.insert(
                id.clone(),
                (vec![emitted.clone()], CptRule::IfParent(detection_prob(level, sensor))),
            );
            received_at
                .entry(sensor.id.as_str())
                .or_default()
                .push((signal.signal_class.as_str(), id));
        }
        specs.insert(emitted, (actions, CptRule::Or));
    }

    for sensor in kb.sensors.values() {
        let classifier = kb.classifier_of(sensor)?;
        for class in &classifier.detects_classes {
            let mut parents = Vec::new();
            for (signal_class, id) in received_at.get(sensor.id.as_str()).into_iter().flatten() {
                if class_matches(signal_class, class, kb)? {
                    parents.push(id.clone());
                }
            }
            let mut modelled = false;
            for signal in kb.signals.values() {
                modelled |= class_matches(&signal.signal_class, class, kb)?;
            }
            if !modelled && !extra.contains(&(sensor.id.clone(), class.clone())) {
                continue;
            }
            specs.insert(
                NodeId::detected(&sensor.id, class),
                (
                    parents,
                    CptRule::AnyParent {
                        any: classifier.true_positive_rate,
                        none: classifier.false_positive_rate,
                    },
                ),
            );
        }
    }

    let position: HashMap<NodeId, usize> = specs
        .keys()
        .enumerate()
        .map(|(i, id)| (id.clone(), i))
        .collect();
    let mut nodes = Vec::with_capacity(specs.len());
    for (id, (parent_ids, rule)) in specs {
        let mut parents: Vec<usize> = parent_ids.iter().map(|p| position[p]).collect();
        parents.sort_unstable();
        if parents.len() > MAX_PARENTS {
            return Err(Error::TooManyParents {
                node: id.to_string(),
                parents: parents.len(),
                max: MAX_PARENTS,
            });
        }
        let rows = rule.rows(parents.len());
        nodes.push(Node {
            id,
            cpt: Cpt { parents, rows },
        });
    }
    BayesianNetwork::from_nodes(nodes)
}

#[derive(Debug, Clone, Copy)]
enum CptRule {
    Root(f64),
    /// `p` when the single parent is true, else 0.
    IfParent(f64),
    /// Deterministic OR of the parents.
    Or,
    /// `any` when at least one parent is true, else `none`.
    AnyParent { any: f64, none: f64 },
}

impl CptRule {
    fn rows(self, parents: usize) -> Vec<f64> {
        (0..1usize << parents)
            .map(|row| match self {
                CptRule::Root(p) => p,
                CptRule::IfParent(p) => if row == 1 { p } else { 0.0 },
                CptRule::Or => if row == 0 { 0.0 } else { 1.0 },
                CptRule::AnyParent { any, none } => if row == 0 { none } else { any },
            })
            .collect()
    }
}
