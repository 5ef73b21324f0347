//! Text formats. A graph is a header line "n m" followed by m lines "u v"
//! (0-based). A stream has one item per line: "+ u v", "- u v" or "?".
//! Blank lines and lines starting with '#' are skipped.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::DynamicGraph;
use crate::sparsify::EdgeOp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, msg: msg.into() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamItem {
    Update(EdgeOp),
    Query,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn number(line: usize, tok: Option<&str>, what: &str) -> Result<usize, ParseError> {
    match tok {
        None => err(line, format!("missing {what}")),
        Some(t) => t.parse().or_else(|_| err(line, format!("bad {what} '{t}'"))),
    }
}

pub fn parse_graph(text: &str) -> Result<DynamicGraph, ParseError> {
    let mut lines = content_lines(text);
    let Some((hl, header)) = lines.next() else { return err(1, "empty graph file") };
    let mut toks = header.split_whitespace();
    let n = number(hl, toks.next(), "vertex count")?;
    let m = number(hl, toks.next(), "edge count")?;
    if toks.next().is_some() {
        return err(hl, "header must be 'n m'");
    }
    let mut g = DynamicGraph::new(n);
    let mut seen = 0;
    for (ln, l) in lines {
        let mut toks = l.split_whitespace();
        let u = number(ln, toks.next(), "endpoint")?;
        let v = number(ln, toks.next(), "endpoint")?;
        if toks.next().is_some() {
            return err(ln, "edge line must be 'u v'");
        }
        if let Err(e) = g.insert_edge(u, v) {
            return err(ln, e.to_string());
        }
        seen += 1;
    }
    if seen != m {
        return err(hl, format!("header announces {m} edges, found {seen}"));
    }
    Ok(g)
}

pub fn parse_stream(text: &str) -> Result<Vec<StreamItem>, ParseError> {
    let mut out = Vec::new();
    for (ln, l) in content_lines(text) {
        let mut toks = l.split_whitespace();
        let item = match toks.next() {
            Some("?") => StreamItem::Query,
            Some(s @ ("+" | "-")) => {
                let u = number(ln, toks.next(), "endpoint")?;
                let v = number(ln, toks.next(), "endpoint")?;
                if u == v {
                    return err(ln, format!("self-loop ({u}, {u}) rejected"));
                }
                StreamItem::Update(if s == "+" { EdgeOp::Insert(u, v) } else { EdgeOp::Delete(u, v) })
            }
            Some(t) => return err(ln, format!("unknown stream token '{t}'")),
            None => unreachable!("blank lines are skipped"),
        };
        if toks.next().is_some() {
            return err(ln, "trailing tokens");
        }
        out.push(item);
    }
    Ok(out)
}

pub fn write_graph(g: &DynamicGraph) -> String {
    let units = g.edge_units();
    let mut s = format!("{} {}\n", g.n(), units.len());
    for (u, v) in units {
        writeln!(s, "{u} {v}").expect("string write");
    }
    s
}

pub fn write_stream(items: &[StreamItem]) -> String {
    let mut s = String::new();
    for it in items {
        match it {
            StreamItem::Query => s.push_str("?\n"),
            StreamItem::Update(EdgeOp::Insert(u, v)) => writeln!(s, "+ {u} {v}").expect("string write"),
            StreamItem::Update(EdgeOp::Delete(u, v)) => writeln!(s, "- {u} {v}").expect("string write"),
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let g = parse_graph("3 3\n0 1\n# c\n1 2\n\n0 1\n").unwrap();
        assert_eq!(g.multiplicity(0, 1), 2);
        assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
    }

    #[test]
    fn graph_errors_carry_line_numbers() {
        assert_eq!(parse_graph("3 2\n0 1\n1 x\n").unwrap_err().line, 3);
        assert_eq!(parse_graph("3 1\n0 0\n").unwrap_err().line, 2);
        assert_eq!(parse_graph("3 1\n0 7\n").unwrap_err().line, 2);
        assert_eq!(parse_graph("3 2\n0 1\n").unwrap_err().line, 1);
        assert!(parse_graph("").is_err());
    }

    #[test]
    fn stream_parse() {
        let s = parse_stream("+ 0 1\n?\n- 0 1\n").unwrap();
        assert_eq!(
            s,
            vec![StreamItem::Update(EdgeOp::Insert(0, 1)), StreamItem::Query, StreamItem::Update(EdgeOp::Delete(0, 1))]
        );
        assert_eq!(parse_stream(&write_stream(&s)).unwrap(), s);
        assert_eq!(parse_stream("?\n* 1 2\n").unwrap_err().line, 2);
        assert_eq!(parse_stream("+ 1\n").unwrap_err().line, 1);
        assert_eq!(parse_stream("+ 2 2\n").unwrap_err().line, 1);
    }
}
