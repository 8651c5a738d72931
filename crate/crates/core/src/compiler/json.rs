//! Canonical JSON interchange for compiled networks.

use std::fmt::Write as _;

use serde::Deserialize;

use super::{BayesianNetwork, Cpt, Node, NodeId, NodeKind};
use crate::error::{Error, Result};

/// Formats a probability with 12 significant digits, printed in its
/// shortest form (`0.5`, `1`, `0.0684298314752`).
pub(crate) fn format_prob(p: f64) -> String {
    if p == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{p:.11e}").parse().unwrap_or(p);
    format!("{rounded}")
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).unwrap_or_default()
}

/// Serializes a network as canonical JSON: object keys sorted, one node per
/// line in network order, fixed probability formatting.
pub fn export_bn(bn: &BayesianNetwork) -> String {
    if bn.is_empty() {
        return r#"{"nodes": []}"#.into();
    }
    let mut out = String::from("{\"nodes\": [\n");
    for (i, node) in bn.nodes().iter().enumerate() {
        let parents: Vec<String> = node
            .cpt
            .parents
            .iter()
            .map(|&p| json_str(&bn.node(p).id.to_string()))
            .collect();
        let rows: Vec<String> = node
            .cpt
            .rows
            .iter()
            .enumerate()
            .map(|(r, p)| {
                let assignment: Vec<&str> = node
                    .cpt
                    .assignment(r)
                    .into_iter()
                    .map(|b| if b { "true" } else { "false" })
                    .collect();
                format!(
                    "{{\"assignment\": [{}], \"p_true\": {}}}",
                    assignment.join(", "),
                    format_prob(*p)
                )
            })
            .collect();
        let _ = write!(
            out,
            "  {{\"cpt\": [{}], \"id\": {}, \"kind\": {}, \"parents\": [{}]}}",
            rows.join(", "),
            json_str(&node.id.to_string()),
            json_str(node.id.kind.as_str()),
            parents.join(", ")
        );
        out.push_str(if i + 1 < bn.len() { ",\n" } else { "\n" });
    }
    out.push_str("]}");
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileNetwork {
    nodes: Vec<FileNode>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileNode {
    id: String,
    kind: String,
    parents: Vec<String>,
    cpt: Vec<FileRow>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRow {
    assignment: Vec<bool>,
    p_true: f64,
}

/// Reads a network written by [`export_bn`]. CPT rows may appear in any
/// order but must cover every parent assignment exactly once.
pub fn import_bn(text: &str) -> Result<BayesianNetwork> {
    let file: FileNetwork =
        serde_json::from_str(text).map_err(|e| Error::InvalidNetwork(e.to_string()))?;
    let ids: Vec<NodeId> = file
        .nodes
        .iter()
        .map(|n| n.id.parse::<NodeId>())
        .collect::<Result<_>>()
        .map_err(|e| Error::InvalidNetwork(e.to_string()))?;
    let position = |id: &str| -> Result<usize> {
        let parsed: NodeId = id.parse().map_err(|e: Error| Error::InvalidNetwork(e.to_string()))?;
        ids.iter()
            .position(|x| *x == parsed)
            .ok_or_else(|| Error::InvalidNetwork(format!("unknown parent `{id}`")))
    };

    let mut nodes = Vec::with_capacity(ids.len());
    for (file_node, id) in file.nodes.iter().zip(&ids) {
        let kind: NodeKind = file_node
            .kind
            .parse()
            .map_err(|e: Error| Error::InvalidNetwork(e.to_string()))?;
        if kind != id.kind {
            return Err(Error::InvalidNetwork(format!(
                "node `{id}` declares kind `{kind}`"
            )));
        }
        let parents: Vec<usize> = file_node
            .parents
            .iter()
            .map(|p| position(p))
            .collect::<Result<_>>()?;
        let n = parents.len();
        if n > super::MAX_PARENTS {
            return Err(Error::TooManyParents {
                node: id.to_string(),
                parents: n,
                max: super::MAX_PARENTS,
            });
        }
        let mut rows = vec![f64::NAN; 1 << n];
        for row in &file_node.cpt {
            if row.assignment.len() != n {
                return Err(Error::InvalidNetwork(format!(
                    "node `{id}` has a CPT row with {} values for {n} parents",
                    row.assignment.len()
                )));
            }
            let r = row.assignment.iter().fold(0, |acc, &b| (acc << 1) | b as usize);
            if !rows[r].is_nan() {
                return Err(Error::InvalidNetwork(format!("node `{id}` repeats a CPT row")));
            }
            rows[r] = row.p_true;
        }
        if rows.iter().any(|p| p.is_nan()) || file_node.cpt.len() != rows.len() {
            return Err(Error::InvalidNetwork(format!("node `{id}` has an incomplete CPT")));
        }
        nodes.push(Node {
            id: id.clone(),
            cpt: Cpt { parents, rows },
        });
    }
    BayesianNetwork::from_nodes(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_formatting() {
        assert_eq!(format_prob(0.5), "0.5");
        assert_eq!(format_prob(1.0), "1");
        assert_eq!(format_prob(0.0), "0");
        assert_eq!(format_prob(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_prob(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_prob(0.1 + 0.2), "0.3");
    }

    #[test]
    fn empty_network() {
        let bn = BayesianNetwork::default();
        assert_eq!(export_bn(&bn), r#"{"nodes": []}"#);
        assert!(import_bn(r#"{"nodes": []}"#).unwrap().is_empty());
    }

    #[test]
    fn two_node_export_and_import() {
        let bn = BayesianNetwork::from_nodes(vec![
            Node {
                id: NodeId::entity("a"),
                cpt: Cpt { parents: vec![], rows: vec![0.5] },
            },
            Node {
                id: NodeId::detected("mic", "glass"),
                cpt: Cpt { parents: vec![0], rows: vec![0.1, 0.9] },
            },
        ])
        .unwrap();
        let text = export_bn(&bn);
        assert_eq!(
            text,
            "{\"nodes\": [\n  \
             {\"cpt\": [{\"assignment\": [], \"p_true\": 0.5}], \"id\": \"entity(a)\", \"kind\": \"entity\", \"parents\": []},\n  \
             {\"cpt\": [{\"assignment\": [false], \"p_true\": 0.1}, {\"assignment\": [true], \"p_true\": 0.9}], \
             \"id\": \"detected(mic, glass)\", \"kind\": \"detected\", \"parents\": [\"entity(a)\"]}\n]}"
        );
        let back = import_bn(&text).unwrap();
        assert_eq!(back, bn);
        let generic: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(generic["nodes"][1]["parents"][0], "entity(a)");
    }

    #[test]
    fn import_rejects_malformed_networks() {
        let missing_row = r#"{"nodes": [{"id": "entity(a)", "kind": "entity", "parents": [], "cpt": []}]}"#;
        assert!(import_bn(missing_row).is_err());
        let wrong_kind = r#"{"nodes": [{"id": "entity(a)", "kind": "action", "parents": [], "cpt": [{"assignment": [], "p_true": 0.5}]}]}"#;
        assert!(import_bn(wrong_kind).is_err());
        let ghost_parent = r#"{"nodes": [{"id": "entity(a)", "kind": "entity", "parents": ["entity(b)"], "cpt": [{"assignment": [false], "p_true": 0}, {"assignment": [true], "p_true": 1}]}]}"#;
        assert!(import_bn(ghost_parent).is_err());
        assert_eq!(import_bn("{").unwrap_err().code(), "invalid-network");
    }
}
