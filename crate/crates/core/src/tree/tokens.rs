//! Pre-order token sequences, the decoder target format.
//!
//! A decision emits its predicate followed by its true and false branches;
//! every leaf emits its action followed by `EOS`. So `Leaf(wait)` becomes
//! `[wait, EOS]` and a depth-2 tree `[p, a1, EOS, a2, EOS]`.

use super::{Domain, LexicalTree, Node, PredicateDictionary, TokenRole, TreeError, EOS};

pub fn tokenize(tree: &LexicalTree) -> Vec<String> {
    fn walk(node: &Node, out: &mut Vec<String>) {
        match node {
            Node::Leaf { action } => {
                out.push(action.clone());
                out.push(EOS.to_string());
            }
            Node::Decision { predicate, if_true, if_false, .. } => {
                out.push(predicate.clone());
                walk(if_true, out);
                walk(if_false, out);
            }
        }
    }
    let mut out = Vec::with_capacity(tree.node_count() + tree.leaf_count());
    walk(&tree.root, &mut out);
    out
}

pub fn detokenize<S: AsRef<str>>(tokens: &[S], dict: &PredicateDictionary) -> Result<LexicalTree, TreeError> {
    fn read<S: AsRef<str>>(tokens: &[S], pos: &mut usize, dict: &PredicateDictionary) -> Result<Node, TreeError> {
        let token = tokens
            .get(*pos)
            .ok_or_else(|| TreeError::TokenSequence("sequence ended inside a subtree".into()))?
            .as_ref();
        *pos += 1;
        match dict.role(token) {
            Some(TokenRole::Decision) | Some(TokenRole::Feature) => {
                let if_true = read(tokens, pos, dict)?;
                let if_false = read(tokens, pos, dict)?;
                Ok(Node::decision(token, if_true, if_false))
            }
            Some(TokenRole::Action) => match tokens.get(*pos).map(AsRef::as_ref) {
                Some(t) if t == EOS => {
                    *pos += 1;
                    Ok(Node::leaf(token))
                }
                _ => Err(TreeError::TokenSequence(format!("expected EOS after action `{token}`"))),
            },
            Some(TokenRole::Special) => Err(TreeError::TokenSequence(format!("unexpected `{token}` at position {}", *pos - 1))),
            None => Err(TreeError::UnknownToken(token.to_string())),
        }
    }
    let mut pos = 0;
    let root = read(tokens, &mut pos, dict)?;
    if pos != tokens.len() {
        return Err(TreeError::TokenSequence(format!("{} trailing tokens", tokens.len() - pos)));
    }
    Ok(LexicalTree::new(dict.domain, root))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeComparison {
    pub exact_match: bool,
    pub token_accuracy: f64,
}

/// Exact structural match plus position-wise token accuracy.
///
/// Positions are aligned from the start; positions past the shorter sequence
/// count as wrong, so the denominator is the longer length.
pub fn compare_trees(predicted: &LexicalTree, target: &LexicalTree) -> Result<TreeComparison, TreeError> {
    if predicted.domain != target.domain {
        return Err(TreeError::DictionaryMismatch { left: predicted.domain, right: target.domain });
    }
    let p = tokenize(predicted);
    let t = tokenize(target);
    let correct = p.iter().zip(&t).filter(|(a, b)| a == b).count();
    let denom = p.len().max(t.len());
    Ok(TreeComparison {
        exact_match: predicted.root == target.root,
        token_accuracy: correct as f64 / denom as f64,
    })
}

/// Domain whose dictionary resolves every token, if any.
pub fn infer_domain<S: AsRef<str>>(tokens: &[S]) -> Option<Domain> {
    Domain::ALL.into_iter().find(|&d| {
        let dict = PredicateDictionary::for_domain(d);
        tokens.iter().all(|t| dict.role(t.as_ref()).is_some())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taxi_tree(root: Node) -> LexicalTree {
        LexicalTree::new(Domain::Taxi, root)
    }

    #[test]
    fn leaf_tokens() {
        assert_eq!(tokenize(&taxi_tree(Node::leaf("wait"))), ["wait", "EOS"]);
    }

    #[test]
    fn decision_tokens() {
        let t = taxi_tree(Node::decision("traffic_jam", Node::leaf("drive_airport"), Node::leaf("drive_city")));
        assert_eq!(tokenize(&t), ["traffic_jam", "drive_airport", "EOS", "drive_city", "EOS"]);
        let dict = PredicateDictionary::taxi();
        assert_eq!(detokenize(&tokenize(&t), &dict).unwrap(), t);
    }

    #[test]
    fn detokenize_rejects_bad_sequences() {
        let dict = PredicateDictionary::taxi();
        assert!(detokenize(&["traffic_jam", "wait", "EOS"], &dict).is_err());
        assert!(detokenize(&["wait"], &dict).is_err());
        assert!(detokenize(&["wait", "EOS", "EOS"], &dict).is_err());
        assert!(detokenize(&["EOS"], &dict).is_err());
        assert!(matches!(detokenize(&["lane_left", "EOS"], &dict), Err(TreeError::UnknownToken(_))));
    }

    #[test]
    fn comparison_scores() {
        let a = taxi_tree(Node::decision("traffic_jam", Node::leaf("drive_airport"), Node::leaf("drive_city")));
        let b = taxi_tree(Node::decision("traffic_jam", Node::leaf("drive_airport"), Node::leaf("wait")));
        assert_eq!(compare_trees(&a, &a).unwrap(), TreeComparison { exact_match: true, token_accuracy: 1.0 });
        let c = compare_trees(&a, &b).unwrap();
        assert!(!c.exact_match);
        assert!((c.token_accuracy - 0.8).abs() < 1e-12);
        // [traffic_jam, drive_airport, EOS, drive_city, EOS]
        // [traffic_jam, drive_airport, EOS, at_city, drive_city, EOS, wait, EOS]
        let longer = taxi_tree(Node::decision(
            "traffic_jam",
            Node::leaf("drive_airport"),
            Node::decision("at_city", Node::leaf("drive_city"), Node::leaf("wait")),
        ));
        let c = compare_trees(&a, &longer).unwrap();
        assert!((c.token_accuracy - 3.0 / 8.0).abs() < 1e-12);
        assert_eq!(c.token_accuracy, compare_trees(&longer, &a).unwrap().token_accuracy);
    }

    #[test]
    fn cross_domain_comparison_fails() {
        let a = taxi_tree(Node::leaf("wait"));
        let b = LexicalTree::new(Domain::Highway, Node::leaf("idle"));
        assert!(matches!(compare_trees(&a, &b), Err(TreeError::DictionaryMismatch { .. })));
    }
}
