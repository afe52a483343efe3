//! Line-based instance files.
//!
//! ```text
//! c optional comment
//! p maxcut <n> <m>
//! e <u> <v> <w>
//! ```
//!
//! Node ids are 0-based; every id below `n` is a node even when isolated.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Graph, GraphError};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `p maxcut` header")]
    MissingHeader,
    #[error("header declares {declared} edges but {found} were read")]
    EdgeCount { declared: usize, found: usize },
    #[error("line {line}: node {node} out of range for n = {n}")]
    NodeOutOfRange { line: usize, node: usize, n: usize },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: GraphError },
}

pub fn parse_instance(text: &str) -> Result<Graph, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut graph = Graph::new();
    let mut found = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let syntax = |msg: &str| ParseError::Syntax { line, msg: msg.to_string() };
        match fields[0] {
            "p" => {
                if header.is_some() {
                    return Err(syntax("duplicate header"));
                }
                if fields.len() != 4 || fields[1] != "maxcut" {
                    return Err(syntax("expected `p maxcut <n> <m>`"));
                }
                let n = fields[2].parse().map_err(|_| syntax("bad node count"))?;
                let m = fields[3].parse().map_err(|_| syntax("bad edge count"))?;
                for v in 0..n {
                    graph.add_node(v);
                }
                header = Some((n, m));
            }
            "e" => {
                let (n, _) = header.ok_or(ParseError::MissingHeader)?;
                if fields.len() != 4 {
                    return Err(syntax("expected `e <u> <v> <w>`"));
                }
                let u: usize = fields[1].parse().map_err(|_| syntax("bad node id"))?;
                let v: usize = fields[2].parse().map_err(|_| syntax("bad node id"))?;
                let w: f64 = fields[3].parse().map_err(|_| syntax("bad weight"))?;
                for node in [u, v] {
                    if node >= n {
                        return Err(ParseError::NodeOutOfRange { line, node, n });
                    }
                }
                graph
                    .add_edge(u, v, w)
                    .map_err(|source| ParseError::Graph { line, source })?;
                found += 1;
            }
            _ => return Err(syntax("unknown line type")),
        }
    }

    let (_, declared) = header.ok_or(ParseError::MissingHeader)?;
    if declared != found {
        return Err(ParseError::EdgeCount { declared, found });
    }
    Ok(graph)
}

/// Serializes a graph whose node ids are exactly `0..n`.
pub fn write_instance(g: &Graph) -> String {
    let n = g.nodes().last().map_or(0, |v| v + 1);
    let mut out = format!("p maxcut {} {}\n", n, g.edge_count());
    for (u, v, w) in g.edges() {
        writeln!(out, "e {u} {v} {w}").unwrap();
    }
    out
}
