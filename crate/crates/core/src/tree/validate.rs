use std::fmt;

use super::{Domain, LexicalTree, Node, PredicateDictionary, TokenRole, MAX_DEPTH};

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DomainMismatch { tree: Domain, dictionary: Domain },
    DepthExceeded { depth: usize },
    UnknownToken { token: String },
    RoleMismatch { token: String, expected: &'static str },
    /// A bare feature name used as a decision without a threshold.
    MissingThreshold { token: String },
    NonFiniteThreshold { token: String },
    /// The annotated comparison is named by a different token.
    NonCanonicalThreshold { token: String, canonical: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DomainMismatch { tree, dictionary } => write!(f, "tree domain {tree} does not match dictionary {dictionary}"),
            Violation::DepthExceeded { depth } => write!(f, "depth {depth} exceeds {MAX_DEPTH}"),
            Violation::UnknownToken { token } => write!(f, "unknown token `{token}`"),
            Violation::RoleMismatch { token, expected } => write!(f, "`{token}` used where {expected} is required"),
            Violation::MissingThreshold { token } => write!(f, "feature `{token}` needs a threshold"),
            Violation::NonFiniteThreshold { token } => write!(f, "threshold on `{token}` is not finite"),
            Violation::NonCanonicalThreshold { token, canonical } => {
                write!(f, "threshold on `{token}` should be expressed with `{canonical}`")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate(tree: &LexicalTree, dict: &PredicateDictionary) -> ValidationReport {
    let mut violations = Vec::new();
    if tree.domain != dict.domain {
        violations.push(Violation::DomainMismatch { tree: tree.domain, dictionary: dict.domain });
    }
    let depth = tree.depth();
    if depth > MAX_DEPTH {
        violations.push(Violation::DepthExceeded { depth });
    }
    check_node(&tree.root, dict, &mut violations);
    ValidationReport { violations }
}

fn check_node(node: &Node, dict: &PredicateDictionary, out: &mut Vec<Violation>) {
    match node {
        Node::Leaf { action } => match dict.role(action) {
            Some(TokenRole::Action) => {}
            Some(_) => out.push(Violation::RoleMismatch { token: action.clone(), expected: "an action" }),
            None => out.push(Violation::UnknownToken { token: action.clone() }),
        },
        Node::Decision { predicate, threshold, if_true, if_false } => {
            match (dict.role(predicate), threshold) {
                (None, _) => out.push(Violation::UnknownToken { token: predicate.clone() }),
                (Some(TokenRole::Action | TokenRole::Special), _) => {
                    out.push(Violation::RoleMismatch { token: predicate.clone(), expected: "a decision" })
                }
                (Some(TokenRole::Feature), None) => out.push(Violation::MissingThreshold { token: predicate.clone() }),
                (Some(_), Some(t)) if !t.is_finite() => out.push(Violation::NonFiniteThreshold { token: predicate.clone() }),
                (Some(_), Some(t)) => {
                    let (feature, direction, _) = dict.condition_of(predicate).expect("role checked");
                    let canonical = dict.canonical_condition(feature, direction, *t);
                    if canonical.token != predicate || canonical.swapped {
                        out.push(Violation::NonCanonicalThreshold {
                            token: predicate.clone(),
                            canonical: canonical.token.to_string(),
                        });
                    }
                }
                (Some(TokenRole::Decision), None) => {}
            }
            check_node(if_true, dict, out);
            check_node(if_false, dict, out);
        }
    }
}
