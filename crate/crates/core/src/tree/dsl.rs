//! Parser for the indentation-based policy language.
//!
//! ```text
//! policy := node
//! node   := action_line
//!         | "if" SP pred ":" NL INDENT node DEDENT "else:" NL INDENT node DEDENT
//! pred   := token | feature SP (">" | "<") SP number
//! ```
//!
//! Indentation is two spaces per level. Blank lines are ignored. The
//! comparison form of `pred` carries a learned threshold in human units and
//! is mapped onto the dictionary with [`PredicateDictionary::canonical_condition`].

use std::fmt;

use thiserror::Error;

use super::{Direction, LexicalTree, Node, PredicateDictionary, TokenRole, MAX_DEPTH};

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownToken(String),
    /// A known token used where the grammar expects the other role.
    WrongRole { token: String, expected: &'static str },
    DepthExceeded,
    MissingBranch,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UnknownToken(t) => write!(f, "unknown token `{t}`"),
            ParseErrorKind::WrongRole { token, expected } => write!(f, "`{token}` is not {expected}"),
            ParseErrorKind::DepthExceeded => write!(f, "tree depth exceeds {MAX_DEPTH}"),
            ParseErrorKind::MissingBranch => write!(f, "decision is missing its `else:` branch"),
        }
    }
}

/// Parse failure with 1-based line and column.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

struct Line<'a> {
    number: usize,
    indent: usize,
    content: &'a str,
}

struct Parser<'a, 'd> {
    lines: Vec<Line<'a>>,
    pos: usize,
    dict: &'d PredicateDictionary,
    end_line: usize,
}

fn err(line: usize, column: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, column, kind }
}

pub fn parse_dsl(text: &str, dict: &PredicateDictionary) -> Result<LexicalTree, ParseError> {
    let mut lines = Vec::new();
    let mut end_line = 1;
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        end_line = number;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() {
            continue;
        }
        let indent = raw.len() - raw.trim_start_matches(' ').len();
        if raw[indent..].starts_with('\t') {
            return Err(err(number, indent + 1, ParseErrorKind::Syntax("tabs are not allowed for indentation".into())));
        }
        if indent % 2 != 0 {
            return Err(err(number, indent + 1, ParseErrorKind::Syntax("indentation must be a multiple of two spaces".into())));
        }
        lines.push(Line { number, indent: indent / 2, content: raw[indent..].trim_end() });
    }
    let mut parser = Parser { lines, pos: 0, dict, end_line };
    let root = parser.node(0, 1)?;
    if let Some(extra) = parser.lines.get(parser.pos) {
        return Err(err(
            extra.number,
            extra.indent * 2 + 1,
            ParseErrorKind::Syntax(format!("unexpected `{}` after complete policy", extra.content)),
        ));
    }
    Ok(LexicalTree::new(dict.domain, root))
}

impl<'a, 'd> Parser<'a, 'd> {
    fn next_line(&mut self, level: usize) -> Result<&Line<'a>, ParseError> {
        let Some(line) = self.lines.get(self.pos) else {
            return Err(err(self.end_line + 1, 1, ParseErrorKind::Syntax("unexpected end of input".into())));
        };
        if line.indent != level {
            return Err(err(
                line.number,
                1,
                ParseErrorKind::Syntax(format!("expected indentation of {} spaces, found {}", level * 2, line.indent * 2)),
            ));
        }
        self.pos += 1;
        Ok(line)
    }

    fn node(&mut self, level: usize, depth: usize) -> Result<Node, ParseError> {
        let line = self.next_line(level)?;
        let (number, column) = (line.number, level * 2 + 1);
        if depth > MAX_DEPTH {
            return Err(err(number, column, ParseErrorKind::DepthExceeded));
        }
        let content = line.content;
        if let Some(rest) = content.strip_prefix("if ") {
            let Some(pred) = rest.strip_suffix(':') else {
                return Err(err(number, column + content.len(), ParseErrorKind::Syntax("expected `:` after condition".into())));
            };
            let condition = self.condition(pred.trim(), number, column + 3)?;
            let if_true = self.node(level + 1, depth + 1)?;
            match self.lines.get(self.pos) {
                Some(l) if l.indent == level && l.content == "else:" => self.pos += 1,
                Some(l) if l.indent == level && l.content.starts_with("else") => {
                    return Err(err(l.number, column, ParseErrorKind::Syntax("expected `else:`".into())));
                }
                _ => return Err(err(number, column, ParseErrorKind::MissingBranch)),
            }
            let if_false = self.node(level + 1, depth + 1)?;
            let (predicate, threshold, swapped) = condition;
            let (if_true, if_false) = if swapped { (if_false, if_true) } else { (if_true, if_false) };
            Ok(Node::Decision { predicate, threshold, if_true: Box::new(if_true), if_false: Box::new(if_false) })
        } else if content == "else:" {
            Err(err(number, column, ParseErrorKind::Syntax("`else:` without matching `if`".into())))
        } else {
            self.check_identifier(content, number, column)?;
            match self.dict.role(content) {
                Some(TokenRole::Action) => Ok(Node::leaf(content)),
                Some(_) => Err(err(number, column, ParseErrorKind::WrongRole { token: content.into(), expected: "an action" })),
                None => Err(err(number, column, ParseErrorKind::UnknownToken(content.into()))),
            }
        }
    }

    fn check_identifier(&self, token: &str, line: usize, column: usize) -> Result<(), ParseError> {
        if let Some(pos) = token.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')) {
            return Err(err(line, column + pos, ParseErrorKind::Syntax(format!("unexpected character in `{token}`"))));
        }
        if token.is_empty() {
            return Err(err(line, column, ParseErrorKind::Syntax("expected a token".into())));
        }
        Ok(())
    }

    /// Returns (predicate token, annotated threshold, branches swapped).
    fn condition(&self, pred: &str, line: usize, column: usize) -> Result<(String, Option<f64>, bool), ParseError> {
        let parts: Vec<&str> = pred.split(' ').collect();
        match parts.as_slice() {
            [token] => {
                self.check_identifier(token, line, column)?;
                match self.dict.role(token) {
                    Some(TokenRole::Decision) => Ok((token.to_string(), None, false)),
                    Some(TokenRole::Feature) => Err(err(
                        line,
                        column,
                        ParseErrorKind::Syntax(format!("feature `{token}` needs a comparison such as `{token} > 1`")),
                    )),
                    Some(_) => Err(err(line, column, ParseErrorKind::WrongRole { token: token.to_string(), expected: "a decision" })),
                    None => Err(err(line, column, ParseErrorKind::UnknownToken(token.to_string()))),
                }
            }
            [feature, op, number] => {
                self.check_identifier(feature, line, column)?;
                let op_col = column + feature.len() + 1;
                let num_col = op_col + op.len() + 1;
                let Some(index) = self.dict.feature_index(feature) else {
                    return Err(err(line, column, ParseErrorKind::UnknownToken(feature.to_string())));
                };
                let direction = match *op {
                    ">" => Direction::Greater,
                    "<" => Direction::Less,
                    _ => return Err(err(line, op_col, ParseErrorKind::Syntax(format!("expected `>` or `<`, found `{op}`")))),
                };
                let threshold: f64 = number
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| err(line, num_col, ParseErrorKind::Syntax(format!("invalid number `{number}`"))))?;
                let canonical = self.dict.canonical_condition(index, direction, threshold);
                Ok((canonical.token.to_string(), Some(threshold), canonical.swapped))
            }
            _ => Err(err(line, column, ParseErrorKind::Syntax(format!("malformed condition `{pred}`")))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taxi() -> PredicateDictionary {
        PredicateDictionary::taxi()
    }

    #[test]
    fn parses_single_decision() {
        let t = parse_dsl("if traffic_jam:\n  drive_airport\nelse:\n  drive_city", &taxi()).unwrap();
        assert_eq!(t.root, Node::decision("traffic_jam", Node::leaf("drive_airport"), Node::leaf("drive_city")));
    }

    #[test]
    fn parses_single_action() {
        assert_eq!(parse_dsl("wait\n", &taxi()).unwrap().root, Node::leaf("wait"));
    }

    #[test]
    fn five_levels_exceed_depth() {
        let text = "\
if at_airport:
  if at_city:
    if at_village:
      drive_city
    else:
      wait
  else:
    wait
else:
  wait
";
        assert_eq!(parse_dsl(text, &taxi()).unwrap().depth(), 4);
        let deeper = text.replace("      drive_city\n", "      if traffic_jam:\n        wait\n      else:\n        wait\n");
        let e = parse_dsl(&deeper, &taxi()).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DepthExceeded);
        assert_eq!(e.line, 5);
    }

    #[test]
    fn missing_else_is_reported() {
        let e = parse_dsl("if traffic_jam:\n  drive_airport\n", &taxi()).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingBranch);
        assert_eq!((e.line, e.column), (1, 1));
    }

    #[test]
    fn unknown_and_misplaced_tokens() {
        let e = parse_dsl("if teleport:\n  wait\nelse:\n  wait", &taxi()).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownToken("teleport".into()));
        assert_eq!((e.line, e.column), (1, 4));
        let e = parse_dsl("if wait:\n  wait\nelse:\n  wait", &taxi()).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::WrongRole { .. }));
        let e = parse_dsl("if traffic_jam:\n  at_city\nelse:\n  wait", &taxi()).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::WrongRole { .. }));
        assert_eq!(e.line, 2);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_dsl("if traffic_jam\n  wait\nelse:\n  wait", &taxi()).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        let e = parse_dsl("if traffic_jam:\n   wait\nelse:\n  wait", &taxi()).unwrap_err();
        assert_eq!((e.line, e.column), (2, 4));
        let e = parse_dsl("wait\nwait", &taxi()).unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_dsl("", &taxi()).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn comparison_conditions_map_to_canonical_tokens() {
        let t = parse_dsl("if village_wait > 5:\n  drive_city\nelse:\n  wait", &taxi()).unwrap();
        assert_eq!(t.root, Node::annotated("wait_gt_5", 5.0, Node::leaf("drive_city"), Node::leaf("wait")));
        // `<` on a feature with only `>` predicates swaps the branches.
        let t = parse_dsl("if village_wait < 3:\n  drive_city\nelse:\n  wait", &taxi()).unwrap();
        assert_eq!(t.root, Node::annotated("wait_gt_2", 3.0, Node::leaf("wait"), Node::leaf("drive_city")));
    }
}
