//! Structure-annotation sidecars: a bracket string per tune, where each
//! `[` may carry an integer note count, e.g. `[12 [5] [7]]`. Counts make
//! the node spans recoverable; count-less shapes parse to zero-width
//! spans.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// One node of the hierarchical structure tree. `span` is a half-open
/// note-index range into the owning tune.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureTree {
    pub span: Range<usize>,
    pub children: Vec<StructureTree>,
}

impl StructureTree {
    /// Validates span nesting and, when the root carries a count, that it
    /// covers the whole tune. Returns a description of the first problem.
    pub fn validate_against(&self, tune_len: usize) -> Result<(), String> {
        if self.span.end - self.span.start > 0 && self.span.end - self.span.start != tune_len {
            return Err(format!(
                "root span covers {} notes but tune has {tune_len}",
                self.span.end - self.span.start
            ));
        }
        self.validate_nesting()
    }

    fn validate_nesting(&self) -> Result<(), String> {
        let mut cursor = self.span.start;
        for child in &self.children {
            if child.span.start < cursor || child.span.end > self.span.end {
                return Err(format!(
                    "child span {:?} escapes parent span {:?}",
                    child.span, self.span
                ));
            }
            cursor = child.span.end;
            child.validate_nesting()?;
        }
        Ok(())
    }

    fn count(&self) -> usize {
        self.span.end - self.span.start
    }
}

/// Parses a bracket string into a structure tree. Children are laid out
/// left to right from the parent's start; a node without an explicit
/// count spans exactly its children.
pub fn parse_structure(text: &str) -> Result<StructureTree, CorpusError> {
    let mut tokens = tokenize(text)?;
    tokens.reverse(); // pop from the back
    let tree = parse_node(&mut tokens, 0, text.len())?;
    if let Some((pos, _)) = tokens.pop().map(|t| (t.1, t.0)) {
        return Err(CorpusError::UnbalancedBracket(pos));
    }
    Ok(tree)
}

#[derive(Debug)]
enum Tok {
    Open,
    Close,
    Count(usize),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, CorpusError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((pos, c)) = chars.next() {
        match c {
            '[' => out.push((Tok::Open, pos)),
            ']' => out.push((Tok::Close, pos)),
            c if c.is_whitespace() => {}
            c if c.is_ascii_digit() => {
                let mut value = c.to_digit(10).unwrap() as usize;
                while let Some(&(_, d)) = chars.peek() {
                    if let Some(digit) = d.to_digit(10) {
                        value = value * 10 + digit as usize;
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Count(value), pos));
            }
            _ => {
                return Err(CorpusError::BadStructure(format!(
                    "unexpected character '{c}' at position {pos}"
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(CorpusError::BadStructure("empty annotation".into()));
    }
    Ok(out)
}

fn parse_node(
    tokens: &mut Vec<(Tok, usize)>,
    start: usize,
    end_of_input: usize,
) -> Result<StructureTree, CorpusError> {
    match tokens.pop() {
        Some((Tok::Open, _)) => {}
        Some((_, pos)) => return Err(CorpusError::UnbalancedBracket(pos)),
        None => return Err(CorpusError::UnbalancedBracket(end_of_input)),
    }
    let count = if let Some((Tok::Count(_), _)) = tokens.last() {
        match tokens.pop() {
            Some((Tok::Count(n), _)) => Some(n),
            _ => unreachable!(),
        }
    } else {
        None
    };
    let mut children = Vec::new();
    let mut cursor = start;
    loop {
        match tokens.last() {
            Some((Tok::Close, _)) => {
                tokens.pop();
                break;
            }
            Some((Tok::Open, _)) => {
                let child = parse_node(tokens, cursor, end_of_input)?;
                cursor = child.span.end;
                children.push(child);
            }
            Some((Tok::Count(_), pos)) => {
                return Err(CorpusError::BadStructure(format!(
                    "stray count at position {pos}"
                )))
            }
            None => return Err(CorpusError::UnbalancedBracket(end_of_input)),
        }
    }
    let span_len = count.unwrap_or(cursor - start);
    if cursor - start > span_len {
        return Err(CorpusError::BadStructure(format!(
            "children cover {} notes but node declares {span_len}",
            cursor - start
        )));
    }
    Ok(StructureTree {
        span: start..start + span_len,
        children,
    })
}

/// Renders a tree back to the sidecar format.
pub fn render_structure(tree: &StructureTree) -> String {
    let mut out = String::new();
    render_node(tree, &mut out);
    out
}

fn render_node(tree: &StructureTree, out: &mut String) {
    out.push('[');
    if tree.count() > 0 {
        out.push_str(&tree.count().to_string());
    }
    for (i, child) in tree.children.iter().enumerate() {
        if i > 0 || tree.count() > 0 {
            out.push(' ');
        }
        render_node(child, out);
    }
    out.push(']');
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_abstract_structure() {
        let tree = parse_structure("[ [ ] [ ] [ [ ] ] ]").unwrap();
        assert_eq!(tree.children.len(), 3);
        assert_eq!(tree.children[2].children.len(), 1);
        assert!(tree.children[0].children.is_empty());
    }

    #[test]
    fn root_only() {
        let tree = parse_structure("[ ]").unwrap();
        assert!(tree.children.is_empty());
    }

    #[test]
    fn unbalanced_reports_end_of_input() {
        let text = "[ [ ]";
        match parse_structure(text) {
            Err(CorpusError::UnbalancedBracket(pos)) => assert_eq!(pos, text.len()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn counts_recover_spans() {
        let tree = parse_structure("[12 [5] [7]]").unwrap();
        assert_eq!(tree.span, 0..12);
        assert_eq!(tree.children[0].span, 0..5);
        assert_eq!(tree.children[1].span, 5..12);
        assert!(tree.validate_against(12).is_ok());
        assert!(tree.validate_against(13).is_err());
    }

    #[test]
    fn overfull_children_rejected() {
        assert!(parse_structure("[4 [3] [3]]").is_err());
    }

    #[test]
    fn render_round_trip() {
        for text in ["[12 [5] [7]]", "[20 [8 [3] [5]] [12]]"] {
            let tree = parse_structure(text).unwrap();
            let rendered = render_structure(&tree);
            assert_eq!(parse_structure(&rendered).unwrap(), tree);
        }
    }
}
