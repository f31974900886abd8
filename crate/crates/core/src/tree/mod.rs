//! Lexical decision trees over per-domain predicate tokens.

mod dictionary;
mod dsl;
mod schema;
mod tokens;
mod validate;

use thiserror::Error;

pub use dictionary::{
    ActionEntry, CanonicalCondition, DecisionPredicate, Direction, Domain, FeatureSpec, PredicateDictionary, TokenRole,
    EOS, MAX_TOKENS, NONTERM, PAD, SPECIAL_TOKENS, UNK,
};
pub use dsl::{parse_dsl, ParseError, ParseErrorKind};
pub use schema::{deserialize, serialize, SCHEMA_VERSION};
pub use tokens::{compare_trees, detokenize, infer_domain, tokenize, TreeComparison};
pub use validate::{validate, ValidationReport, Violation};

/// Maximum tree depth; a lone leaf has depth 1.
pub const MAX_DEPTH: usize = 4;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("invalid dictionary: {0}")]
    InvalidDictionary(String),
    #[error("dictionary mismatch: {left} vs {right}")]
    DictionaryMismatch { left: Domain, right: Domain },
    #[error("malformed tree document: {0}")]
    Malformed(String),
    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("malformed token sequence: {0}")]
    TokenSequence(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Decision {
        predicate: String,
        /// Learned threshold in human units, set when the node comes from a
        /// discretized policy. `None` means the dictionary threshold.
        threshold: Option<f64>,
        if_true: Box<Node>,
        if_false: Box<Node>,
    },
    Leaf {
        action: String,
    },
}

impl Node {
    pub fn leaf(action: impl Into<String>) -> Self {
        Node::Leaf { action: action.into() }
    }

    pub fn decision(predicate: impl Into<String>, if_true: Node, if_false: Node) -> Self {
        Node::Decision {
            predicate: predicate.into(),
            threshold: None,
            if_true: Box::new(if_true),
            if_false: Box::new(if_false),
        }
    }

    pub fn annotated(predicate: impl Into<String>, threshold: f64, if_true: Node, if_false: Node) -> Self {
        Node::Decision {
            predicate: predicate.into(),
            threshold: Some(threshold),
            if_true: Box::new(if_true),
            if_false: Box::new(if_false),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Decision { if_true, if_false, .. } => 1 + if_true.depth().max(if_false.depth()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Decision { if_true, if_false, .. } => 1 + if_true.node_count() + if_false.node_count(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Decision { if_true, if_false, .. } => if_true.leaf_count() + if_false.leaf_count(),
        }
    }

    fn strip_annotations(&self) -> Node {
        match self {
            Node::Leaf { action } => Node::leaf(action.clone()),
            Node::Decision { predicate, if_true, if_false, .. } => {
                Node::decision(predicate.clone(), if_true.strip_annotations(), if_false.strip_annotations())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexicalTree {
    pub domain: Domain,
    pub root: Node,
}

impl LexicalTree {
    pub fn new(domain: Domain, root: Node) -> Self {
        Self { domain, root }
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaf_count()
    }

    pub fn dictionary(&self) -> PredicateDictionary {
        PredicateDictionary::for_domain(self.domain)
    }

    /// Copy with every learned threshold removed.
    pub fn without_annotations(&self) -> LexicalTree {
        LexicalTree::new(self.domain, self.root.strip_annotations())
    }

    /// Crisp evaluation on an observation: the action token at the reached leaf.
    pub fn act<'a>(&'a self, observation: &[f64], dict: &PredicateDictionary) -> Result<&'a str, TreeError> {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { action } => return Ok(action),
                Node::Decision { predicate, threshold, if_true, if_false } => {
                    let (feature, direction, default) =
                        dict.condition_of(predicate).ok_or_else(|| TreeError::UnknownToken(predicate.clone()))?;
                    let limit = threshold.or(default).ok_or_else(|| TreeError::UnknownToken(predicate.clone()))?;
                    let value = observation[feature] * dict.features[feature].scale;
                    node = if direction.holds(value, limit) { if_true } else { if_false };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_counts_the_root_as_one() {
        assert_eq!(Node::leaf("wait").depth(), 1);
        let t = Node::decision("traffic_jam", Node::leaf("drive_airport"), Node::leaf("drive_city"));
        assert_eq!(t.depth(), 2);
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.leaf_count(), 2);
    }

    #[test]
    fn crisp_evaluation_follows_thresholds() {
        let dict = PredicateDictionary::taxi();
        let tree = LexicalTree::new(
            Domain::Taxi,
            Node::decision("wait_gt_2", Node::leaf("drive_city"), Node::leaf("wait")),
        );
        assert_eq!(tree.act(&[0.0, 0.0, 1.0, 0.0, 0.3], &dict).unwrap(), "drive_city");
        assert_eq!(tree.act(&[0.0, 0.0, 1.0, 0.0, 0.2], &dict).unwrap(), "wait");
    }
}
