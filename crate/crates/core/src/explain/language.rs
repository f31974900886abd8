//! Template English for trees.
//!
//! Basic text reads as an ordered rule list: one sentence per leaf in
//! pre-order (true branch first), each conditioned only on the predicates that
//! held along its path. Taking the first rule that matches reproduces the
//! tree, because every earlier leaf requires a predicate that failed on the
//! way to this one. The leaf reached when everything fails becomes the
//! closing "Otherwise" sentence.

use super::phrases::{MissingPhrase, PhraseTable};
use super::{comparison, render_program, render_tree_text, ExplanationStyle};
use crate::tree::{Direction, LexicalTree, Node, PredicateDictionary};

/// Source of surface choices while rendering.
pub trait Chooser {
    /// Picks one of `n` variants.
    fn choose(&mut self, n: usize) -> usize;

    /// Order in which to list `n` conjoined conditions.
    fn order(&mut self, n: usize) -> Vec<usize> {
        (0..n).collect()
    }
}

/// Always the canonical variant, in tree order.
pub struct FirstChoice;

impl Chooser for FirstChoice {
    fn choose(&mut self, _n: usize) -> usize {
        0
    }
}

struct Rule<'a> {
    conditions: Vec<(&'a str, Option<f64>)>,
    action: &'a str,
}

fn rules(node: &Node) -> Vec<Rule<'_>> {
    fn go<'a>(node: &'a Node, held: &mut Vec<(&'a str, Option<f64>)>, out: &mut Vec<Rule<'a>>) {
        match node {
            Node::Leaf { action } => out.push(Rule { conditions: held.clone(), action }),
            Node::Decision { predicate, threshold, if_true, if_false } => {
                held.push((predicate, *threshold));
                go(if_true, held, out);
                held.pop();
                go(if_false, held, out);
            }
        }
    }
    let mut out = Vec::new();
    go(node, &mut Vec::new(), &mut out);
    out
}

/// Numbers as a reader would write them: integers bare, otherwise two decimals at most.
pub(crate) fn human_number(v: f64) -> String {
    let rounded = (v * 100.0).round() / 100.0;
    let s = format!("{rounded:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn condition(
    token: &str,
    threshold: Option<f64>,
    dict: &PredicateDictionary,
    table: &PhraseTable,
    chooser: &mut dyn Chooser,
) -> Result<String, MissingPhrase> {
    match threshold {
        None => {
            let variants = table.condition(token)?;
            Ok(variants[chooser.choose(variants.len())].to_string())
        }
        Some(t) => {
            let (feature, direction) = comparison(token, dict);
            let noun = table.feature(feature)?;
            let relation = match direction {
                Direction::Greater => "is greater than",
                Direction::Less => "is less than",
            };
            Ok(format!("{noun} {relation} {}", human_number(t)))
        }
    }
}

fn action(token: &str, table: &PhraseTable, chooser: &mut dyn Chooser) -> Result<String, MissingPhrase> {
    let variants = table.action(token)?;
    Ok(variants[chooser.choose(variants.len())].to_string())
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Basic text with every surface choice delegated to `chooser`.
pub(crate) fn render_with(tree: &LexicalTree, table: &PhraseTable, chooser: &mut dyn Chooser) -> Result<String, MissingPhrase> {
    let dict = tree.dictionary();
    let mut sentences = Vec::new();
    for rule in rules(&tree.root) {
        let act = action(rule.action, table, chooser)?;
        if rule.conditions.is_empty() {
            let lead = if sentences.is_empty() {
                ["Always", "No matter what,", "In every situation,", "Regardless of the situation,"]
            } else {
                ["Otherwise,", "In all other cases,", "If none of that applies,", "Else,"]
            };
            sentences.push(format!("{} {act}.", lead[chooser.choose(lead.len())]));
            continue;
        }
        let mut parts = Vec::with_capacity(rule.conditions.len());
        for (token, threshold) in &rule.conditions {
            parts.push(condition(token, *threshold, &dict, table, chooser)?);
        }
        let order = chooser.order(parts.len());
        let glue = [" and ", " and also "][chooser.choose(2)];
        let cond = order.iter().map(|&i| parts[i].as_str()).collect::<Vec<_>>().join(glue);
        sentences.push(match chooser.choose(4) {
            0 => format!("If {cond}, {act}."),
            1 => format!("When {cond}, {act}."),
            2 => format!("{} if {cond}.", capitalize(&act)),
            _ => format!("In case {cond}, {act}."),
        });
    }
    Ok(sentences.join(" "))
}

fn render_modified(tree: &LexicalTree, table: &PhraseTable) -> Result<String, MissingPhrase> {
    fn go(node: &Node, depth: usize, dict: &PredicateDictionary, table: &PhraseTable, out: &mut Vec<String>) -> Result<(), MissingPhrase> {
        let indent = "  ".repeat(depth);
        match node {
            Node::Leaf { action: a } => out.push(format!("{indent}{}.", capitalize(&action(a, table, &mut FirstChoice)?))),
            Node::Decision { predicate, threshold, if_true, if_false } => {
                out.push(format!("{indent}If {}:", condition(predicate, *threshold, dict, table, &mut FirstChoice)?));
                go(if_true, depth + 1, dict, table, out)?;
                out.push(format!("{indent}Otherwise:"));
                go(if_false, depth + 1, dict, table, out)?;
            }
        }
        Ok(())
    }
    if let Node::Leaf { action: a } = &tree.root {
        return Ok(format!("Always {}.", action(a, table, &mut FirstChoice)?));
    }
    let mut lines = Vec::new();
    go(&tree.root, 0, &tree.dictionary(), table, &mut lines)?;
    Ok(lines.join("\n"))
}

/// English rendering; the non-language styles are passed through.
pub fn render_language(tree: &LexicalTree, style: ExplanationStyle, dict: &PredicateDictionary) -> Result<String, MissingPhrase> {
    let table = PhraseTable::for_domain(tree.domain);
    match style {
        ExplanationStyle::BasicText => render_with(tree, &table, &mut FirstChoice),
        ExplanationStyle::ModifiedText => render_modified(tree, &table),
        ExplanationStyle::TreeText => Ok(render_tree_text(tree, dict)),
        ExplanationStyle::Program => Ok(render_program(tree, dict)),
    }
}
