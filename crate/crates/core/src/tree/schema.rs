//! Canonical JSON document for lexical trees.
//!
//! `{"domain":"taxi","root":<node>,"v":1}` where a node is either
//! `{"leaf":"wait"}` or `{"decision":"traffic_jam","false":<node>,"true":<node>}`
//! with an optional `"threshold"` for learned comparators. Keys are emitted in
//! sorted order so equal trees serialize to identical bytes.

use serde::{Deserialize, Serialize};

use super::{Domain, LexicalTree, Node, TreeError};

pub const SCHEMA_VERSION: u32 = 1;

// Field order is the serialized key order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeDoc {
    domain: Domain,
    root: NodeDoc,
    v: u32,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    decision: Option<String>,
    #[serde(rename = "false", skip_serializing_if = "Option::is_none", default)]
    if_false: Option<Box<NodeDoc>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    leaf: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    threshold: Option<f64>,
    #[serde(rename = "true", skip_serializing_if = "Option::is_none", default)]
    if_true: Option<Box<NodeDoc>>,
}

impl From<&Node> for NodeDoc {
    fn from(node: &Node) -> Self {
        match node {
            Node::Leaf { action } => NodeDoc { leaf: Some(action.clone()), ..Default::default() },
            Node::Decision { predicate, threshold, if_true, if_false } => NodeDoc {
                decision: Some(predicate.clone()),
                if_false: Some(Box::new(NodeDoc::from(&**if_false))),
                threshold: *threshold,
                if_true: Some(Box::new(NodeDoc::from(&**if_true))),
                leaf: None,
            },
        }
    }
}

impl NodeDoc {
    fn into_node(self) -> Result<Node, TreeError> {
        match self {
            NodeDoc { leaf: Some(action), decision: None, if_true: None, if_false: None, threshold: None } => {
                Ok(Node::Leaf { action })
            }
            NodeDoc { leaf: None, decision: Some(predicate), if_true, if_false, threshold } => {
                let if_true = if_true.ok_or_else(|| missing(&predicate, "true"))?;
                let if_false = if_false.ok_or_else(|| missing(&predicate, "false"))?;
                if threshold.is_some_and(|t| !t.is_finite()) {
                    return Err(TreeError::Malformed(format!("non-finite threshold on `{predicate}`")));
                }
                Ok(Node::Decision {
                    predicate,
                    threshold,
                    if_true: Box::new(if_true.into_node()?),
                    if_false: Box::new(if_false.into_node()?),
                })
            }
            _ => Err(TreeError::Malformed("node must be either a leaf or a decision".into())),
        }
    }
}

fn missing(predicate: &str, branch: &str) -> TreeError {
    TreeError::Malformed(format!("decision `{predicate}` is missing its `{branch}` branch"))
}

pub fn serialize(tree: &LexicalTree) -> String {
    let doc = TreeDoc { domain: tree.domain, root: NodeDoc::from(&tree.root), v: SCHEMA_VERSION };
    serde_json::to_string(&doc).expect("tree documents always serialize")
}

pub fn deserialize(text: &str) -> Result<LexicalTree, TreeError> {
    // Check the version before the rest so a future layout reports the right error.
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| TreeError::Malformed(e.to_string()))?;
    match value.get("v").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => return Err(TreeError::SchemaVersion { found: v as u32, expected: SCHEMA_VERSION }),
        None => return Err(TreeError::Malformed("missing version field `v`".into())),
    }
    let doc: TreeDoc = serde_json::from_value(value).map_err(|e| TreeError::Malformed(e.to_string()))?;
    Ok(LexicalTree::new(doc.domain, doc.root.into_node()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaf_document() {
        let t = LexicalTree::new(Domain::Taxi, Node::leaf("wait"));
        let text = serialize(&t);
        assert_eq!(text, r#"{"domain":"taxi","root":{"leaf":"wait"},"v":1}"#);
        assert_eq!(deserialize(&text).unwrap(), t);
    }

    #[test]
    fn decision_keys_are_sorted() {
        let t = LexicalTree::new(
            Domain::Taxi,
            Node::annotated("wait_gt_5", 5.5, Node::leaf("drive_city"), Node::leaf("wait")),
        );
        assert_eq!(
            serialize(&t),
            r#"{"domain":"taxi","root":{"decision":"wait_gt_5","false":{"leaf":"wait"},"threshold":5.5,"true":{"leaf":"drive_city"}},"v":1}"#
        );
    }

    #[test]
    fn complete_depth_four_round_trip() {
        fn build(depth: usize, next: &mut usize) -> Node {
            if depth == 1 {
                *next += 1;
                return Node::leaf(["drive_airport", "drive_city", "drive_village", "wait"][*next % 4]);
            }
            let pred = ["at_airport", "traffic_jam", "wait_gt_2"][depth - 2];
            Node::decision(pred, build(depth - 1, next), build(depth - 1, next))
        }
        let t = LexicalTree::new(Domain::Taxi, build(4, &mut 0));
        assert_eq!(t.node_count(), 15);
        assert_eq!(deserialize(&serialize(&t)).unwrap(), t);
    }

    #[test]
    fn missing_false_branch_is_rejected() {
        let text = r#"{"domain":"taxi","root":{"decision":"traffic_jam","true":{"leaf":"wait"}},"v":1}"#;
        assert!(matches!(deserialize(text), Err(TreeError::Malformed(m)) if m.contains("false")));
    }

    #[test]
    fn version_and_shape_errors() {
        assert!(matches!(
            deserialize(r#"{"domain":"taxi","root":{"leaf":"wait"},"v":2}"#),
            Err(TreeError::SchemaVersion { found: 2, .. })
        ));
        assert!(deserialize(r#"{"domain":"taxi","root":{"leaf":"wait","decision":"x"},"v":1}"#).is_err());
        assert!(deserialize(r#"{"domain":"taxi","root":{"leaf":"wait"},"v":1,"extra":0}"#).is_err());
        assert!(deserialize("not json").is_err());
    }
}
