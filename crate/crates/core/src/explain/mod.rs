//! Renders lexical trees as box-drawn trees, programs, and English.

mod language;
mod phrases;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::tree::{Direction, LexicalTree, Node, PredicateDictionary};

pub use language::{render_language, Chooser, FirstChoice};
pub(crate) use language::render_with;
pub use phrases::{MissingPhrase, PhraseTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationStyle {
    TreeText,
    Program,
    BasicText,
    ModifiedText,
}

impl ExplanationStyle {
    pub const ALL: [ExplanationStyle; 4] = [Self::TreeText, Self::Program, Self::BasicText, Self::ModifiedText];

    /// Short name used on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            Self::TreeText => "tree",
            Self::Program => "program",
            Self::BasicText => "text",
            Self::ModifiedText => "modified",
        }
    }
}

impl fmt::Display for ExplanationStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for ExplanationStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|st| st.cli_name() == s)
            .ok_or_else(|| format!("unknown style `{s}` (expected tree, program, text or modified)"))
    }
}

/// Renders `tree` in any style.
pub fn render(tree: &LexicalTree, style: ExplanationStyle) -> Result<String, MissingPhrase> {
    let dict = tree.dictionary();
    Ok(match style {
        ExplanationStyle::TreeText => render_tree_text(tree, &dict),
        ExplanationStyle::Program => render_program(tree, &dict),
        ExplanationStyle::BasicText | ExplanationStyle::ModifiedText => render_language(tree, style, &dict)?,
    })
}

/// Feature name and direction an annotated node compares with.
pub(crate) fn comparison<'a>(predicate: &'a str, dict: &PredicateDictionary) -> (&'a str, Direction) {
    match dict.condition_of(predicate) {
        Some((feature, direction, _)) => (dict.features[feature].name, direction),
        // Invalid trees still render; the raw token stands in for the feature.
        None => (predicate, Direction::Greater),
    }
}

fn condition_label(predicate: &str, threshold: Option<f64>, dict: &PredicateDictionary) -> String {
    match threshold {
        None => predicate.to_string(),
        Some(t) => {
            let (feature, direction) = comparison(predicate, dict);
            format!("{feature} {} {t}", direction.symbol())
        }
    }
}

/// Box-drawing layout, one node per line, children labelled True/False.
pub fn render_tree_text(tree: &LexicalTree, dict: &PredicateDictionary) -> String {
    fn label(node: &Node, dict: &PredicateDictionary) -> String {
        match node {
            Node::Leaf { action } => action.clone(),
            Node::Decision { predicate, threshold, .. } => condition_label(predicate, *threshold, dict),
        }
    }
    fn children(node: &Node, prefix: &str, dict: &PredicateDictionary, out: &mut Vec<String>) {
        if let Node::Decision { if_true, if_false, .. } = node {
            for (branch, child, last) in [("True", if_true, false), ("False", if_false, true)] {
                let (elbow, pad) = if last { ("└── ", "    ") } else { ("├── ", "│   ") };
                out.push(format!("{prefix}{elbow}{branch}: {}", label(child, dict)));
                children(child, &format!("{prefix}{pad}"), dict, out);
            }
        }
    }
    let mut lines = vec![label(&tree.root, dict)];
    children(&tree.root, "", dict, &mut lines);
    lines.join("\n")
}

/// The tree in the policy language accepted by [`crate::tree::parse_dsl`].
pub fn render_program(tree: &LexicalTree, dict: &PredicateDictionary) -> String {
    fn go(node: &Node, depth: usize, dict: &PredicateDictionary, out: &mut Vec<String>) {
        let indent = "  ".repeat(depth);
        match node {
            Node::Leaf { action } => out.push(format!("{indent}{action}")),
            Node::Decision { predicate, threshold, if_true, if_false } => {
                out.push(format!("{indent}if {}:", condition_label(predicate, *threshold, dict)));
                go(if_true, depth + 1, dict, out);
                out.push(format!("{indent}else:"));
                go(if_false, depth + 1, dict, out);
            }
        }
    }
    let mut lines = Vec::new();
    go(&tree.root, 0, dict, &mut lines);
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{parse_dsl, Domain};

    fn sample() -> LexicalTree {
        LexicalTree::new(
            Domain::Taxi,
            Node::decision(
                "at_village",
                Node::decision("wait_gt_5", Node::leaf("drive_city"), Node::leaf("wait")),
                Node::decision("traffic_jam", Node::leaf("drive_village"), Node::leaf("drive_city")),
            ),
        )
    }

    #[test]
    fn leaf_tree_text_is_the_action() {
        let t = LexicalTree::new(Domain::Taxi, Node::leaf("wait"));
        assert_eq!(render_tree_text(&t, &t.dictionary()), "wait");
    }

    #[test]
    fn tree_text_layout() {
        let t = sample();
        let expected = "\
at_village
├── True: wait_gt_5
│   ├── True: drive_city
│   └── False: wait
└── False: traffic_jam
    ├── True: drive_village
    └── False: drive_city";
        assert_eq!(render_tree_text(&t, &t.dictionary()), expected);
    }

    #[test]
    fn program_matches_parser_example() {
        let t = LexicalTree::new(Domain::Taxi, Node::decision("traffic_jam", Node::leaf("drive_airport"), Node::leaf("drive_city")));
        let text = render_program(&t, &t.dictionary());
        assert_eq!(text, "if traffic_jam:\n  drive_airport\nelse:\n  drive_city");
        assert_eq!(parse_dsl(&text, &t.dictionary()).unwrap(), t);
    }

    #[test]
    fn annotated_program_uses_learned_value() {
        let t = LexicalTree::new(Domain::Taxi, Node::annotated("wait_gt_5", 5.0, Node::leaf("drive_city"), Node::leaf("wait")));
        let text = render_program(&t, &t.dictionary());
        assert_eq!(text, "if village_wait > 5:\n  drive_city\nelse:\n  wait");
        assert_eq!(parse_dsl(&text, &t.dictionary()).unwrap(), t);
        let hw = LexicalTree::new(Domain::Highway, Node::annotated("car_ahead_close", 12.25, Node::leaf("slower"), Node::leaf("faster")));
        let text = render_program(&hw, &hw.dictionary());
        assert!(text.starts_with("if ahead_dx < 12.25:"));
        assert_eq!(parse_dsl(&text, &hw.dictionary()).unwrap(), hw);
    }

    #[test]
    fn style_names_round_trip() {
        for s in ExplanationStyle::ALL {
            assert_eq!(s.cli_name().parse::<ExplanationStyle>().unwrap(), s);
        }
        assert!("prose".parse::<ExplanationStyle>().is_err());
    }
}
