// Copyright 2026 The stablepath Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Line-based topology files.
//!
//! ```text
//! # comment
//! dest 6
//! node 1
//! node 0 attacker
//! edge 1 2 peer        # or: plain
//! edge 3 1 p2c         # 3 is a customer of 1
//! ```

use thiserror::Error;

use super::{AsGraph, GraphError, NodeId, Relationship};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: GraphError },
    #[error("expected exactly one `dest` line, found {0}")]
    Destination(usize),
}

pub(crate) fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

pub(crate) fn parse_id(line: usize, tok: &str) -> Result<NodeId, ParseError> {
    tok.parse::<u32>()
        .map(NodeId)
        .map_err(|_| syntax(line, format!("bad node id `{tok}`")))
}

/// Strips comments and blank lines, yielding 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

pub fn parse_topology(text: &str) -> Result<AsGraph, ParseError> {
    let mut dest = Vec::new();
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (line, toks) in content_lines(text) {
        match toks.as_slice() {
            ["dest", id] => dest.push((line, parse_id(line, id)?)),
            ["node", id] => nodes.push((line, parse_id(line, id)?, false)),
            ["node", id, "attacker"] => nodes.push((line, parse_id(line, id)?, true)),
            ["edge", u, v, kind] => {
                let (u, v) = (parse_id(line, u)?, parse_id(line, v)?);
                let rel = match *kind {
                    "peer" => Relationship::Peer,
                    "plain" => Relationship::Unlabeled,
                    "p2c" => Relationship::CustomerToProvider {
                        customer: u,
                        provider: v,
                    },
                    other => return Err(syntax(line, format!("unknown edge kind `{other}`"))),
                };
                edges.push((line, u, v, rel));
            }
            _ => {
                return Err(syntax(
                    line,
                    format!("unrecognized line `{}`", toks.join(" ")),
                ))
            }
        }
    }
    if dest.len() != 1 {
        return Err(ParseError::Destination(dest.len()));
    }
    let (_, d) = dest[0];
    let mut g = AsGraph::new(d);
    for (line, id, attacker) in nodes {
        let res = if id == d && !attacker {
            Ok(())
        } else if attacker {
            if g.contains(id) && !g.is_attacker(id) && id != d {
                Err(GraphError::DuplicateNode(id))
            } else {
                g.add_attacker(id)
            }
        } else {
            g.add_node(id)
        };
        res.map_err(|source| ParseError::Graph { line, source })?;
    }
    for (line, u, v, rel) in edges {
        g.add_edge(u, v, rel)
            .map_err(|source| ParseError::Graph { line, source })?;
    }
    Ok(g)
}

/// Renders `graph` in the topology file format.
pub fn write_topology(graph: &AsGraph) -> String {
    let mut out = format!("dest {}\n", graph.destination());
    for n in graph.nodes() {
        if *n == graph.destination() {
            continue;
        }
        if graph.is_attacker(*n) {
            out.push_str(&format!("node {n} attacker\n"));
        } else {
            out.push_str(&format!("node {n}\n"));
        }
    }
    for e in graph.edges() {
        let line = match e.rel {
            Relationship::Peer => format!("edge {} {} peer\n", e.a, e.b),
            Relationship::Unlabeled => format!("edge {} {} plain\n", e.a, e.b),
            Relationship::CustomerToProvider { customer, provider } => {
                format!("edge {customer} {provider} p2c\n")
            }
        };
        out.push_str(&line);
    }
    out
}
