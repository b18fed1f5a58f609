//! Extracting structure from completion text.

use serde::{Deserialize, Serialize};

use crate::lang::{is_identifier, parse_expression, ExprKind};

/// Text between `<START_{name}>` and the following `<END_{name}>`, trimmed.
pub fn block<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    let open = format!("<START_{name}>");
    let close = format!("<END_{name}>");
    let start = text.find(&open)? + open.len();
    let end = text[start..].find(&close)? + start;
    Some(text[start..end].trim())
}

/// Drop a surrounding Markdown code fence, if any.
pub fn strip_fences(text: &str) -> &str {
    let t = text.trim();
    let Some(rest) = t.strip_prefix("```") else { return t };
    let body = rest.split_once('\n').map_or("", |(_, b)| b);
    body.trim_end().strip_suffix("```").unwrap_or(body).trim()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedBlock {
    pub conditions: Vec<String>,
    pub queries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BlockError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("expected {expected} {what}, found {found}")]
    Count {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("missing <START_{0}> ... <END_{0}> block")]
    MissingBlock(&'static str),
    #[error("dependency graph: {0}")]
    Graph(String),
}

/// Split a parse completion into condition and query expressions.
///
/// Each non-empty line that is not a `//` comment holds one expression;
/// `condition(...)` lines are conditions, every other line is a query.
/// All expressions must parse, and the counts must match the vignette.
pub fn parse_block(text: &str, n_conditions: usize, n_queries: usize) -> Result<ParsedBlock, BlockError> {
    let body = block(text, "LANGUAGE_TO_WEBPPL_CODE").unwrap_or_else(|| strip_fences(text));
    let mut out = ParsedBlock {
        conditions: Vec::new(),
        queries: Vec::new(),
    };
    for (i, raw) in body.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let line = line.trim_end_matches(';').trim_end();
        let expr = parse_expression(line).map_err(|d| BlockError::Syntax {
            line: i + 1,
            message: d.to_string(),
        })?;
        if matches!(expr.kind, ExprKind::Condition(_)) {
            out.conditions.push(line.to_string());
        } else {
            out.queries.push(line.to_string());
        }
    }
    if out.conditions.len() != n_conditions {
        return Err(BlockError::Count {
            what: "conditions",
            expected: n_conditions,
            found: out.conditions.len(),
        });
    }
    if out.queries.len() != n_queries {
        return Err(BlockError::Count {
            what: "queries",
            expected: n_queries,
            found: out.queries.len(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyEdge {
    pub concept: String,
    pub depends_on: Vec<String>,
}

/// Parse a graph of `- concept` lines, each optionally followed by an
/// indented `- depends on: a, b` line. Concepts are distinct identifiers.
pub fn parse_graph(text: &str) -> Result<Vec<DependencyEdge>, BlockError> {
    let mut graph: Vec<DependencyEdge> = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let item = line.strip_prefix('-').map_or(line, str::trim);
        if let Some(deps) = item.strip_prefix("depends on:") {
            let Some(last) = graph.last_mut() else {
                return Err(BlockError::Graph("`depends on` before any concept".into()));
            };
            for d in deps.split(',').map(str::trim).filter(|d| !d.is_empty()) {
                if !is_identifier(d) {
                    return Err(BlockError::Graph(format!("`{d}` is not an identifier")));
                }
                last.depends_on.push(d.to_string());
            }
        } else {
            if !is_identifier(item) {
                return Err(BlockError::Graph(format!("`{item}` is not an identifier")));
            }
            if graph.iter().any(|e| e.concept == item) {
                return Err(BlockError::Graph(format!("`{item}` is listed twice")));
            }
            graph.push(DependencyEdge {
                concept: item.to_string(),
                depends_on: Vec::new(),
            });
        }
    }
    if graph.is_empty() {
        return Err(BlockError::Graph("no concepts".into()));
    }
    Ok(graph)
}

/// The augmented background text and graph of a background completion.
pub fn parse_background(text: &str) -> Result<(String, Vec<DependencyEdge>), BlockError> {
    let background = block(text, "BACKGROUND").ok_or(BlockError::MissingBlock("BACKGROUND"))?;
    let graph = block(text, "DEPENDENCY_GRAPH").ok_or(BlockError::MissingBlock("DEPENDENCY_GRAPH"))?;
    Ok((background.to_string(), parse_graph(graph)?))
}

/// Program definitions from a model completion: the `MODEL` block if
/// present, else the text without code fences.
pub fn model_definitions(text: &str) -> &str {
    block(text, "MODEL").unwrap_or_else(|| strip_fences(text))
}

/// Numeric tokens in order of appearance, each flagged when integral. A `-`
/// directly before the digits counts as a sign unless it follows a word
/// character (so `60-70` yields 60 and 70).
fn numbers(text: &str) -> Vec<(f64, bool)> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if !b[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        let mut integer = true;
        if i + 1 < b.len() && b[i] == b'.' && b[i + 1].is_ascii_digit() {
            integer = false;
            i += 1;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
        }
        let negative = start > 0 && b[start - 1] == b'-' && (start < 2 || !b[start - 2].is_ascii_alphanumeric());
        let v: f64 = text[start..i].parse().expect("digits parse");
        out.push((if negative { -v } else { v }, integer));
    }
    out
}

/// The first number in [0, 100], as a baseline answer.
pub fn first_in_range_number(text: &str) -> Option<f64> {
    numbers(text).into_iter().map(|(v, _)| v).find(|v| (0.0..=100.0).contains(v))
}

/// The first integer in 0..=100, as a judge score.
pub fn first_score(text: &str) -> Option<u32> {
    numbers(text)
        .into_iter()
        .find(|&(v, int)| int && (0.0..=100.0).contains(&v))
        .map(|(v, _)| v as u32)
}
