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

//! Profile override files.
//!
//! ```text
//! rank 1 1,3,0,6 > 1,0,6 > 1,6
//! export 1 2 deny 1,6
//! export 1 3 allow all
//! ```

use thiserror::Error;

use super::{ExportOverride, PolicyProfile, ProfileMode, Ranking, Route};
use crate::graph::{content_lines, parse_id, syntax, AsGraph, NodeId, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OverrideError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: node {node} has no policy (destination, attacker or unknown)")]
    NoPolicy { line: usize, node: NodeId },
    #[error("line {line}: route {route} does not start at {node}")]
    NotOwned {
        line: usize,
        node: NodeId,
        route: Route,
    },
    #[error("line {line}: {node} and {neighbor} are not adjacent")]
    NotAdjacent {
        line: usize,
        node: NodeId,
        neighbor: NodeId,
    },
}

fn parse_route(line: usize, tok: &str) -> Result<Route, ParseError> {
    tok.parse::<Route>()
        .map_err(|e| syntax(line, e.to_string()))
}

/// Applies an override file on top of `profile`. Any `rank` line switches the
/// profile mode to [`ProfileMode::Custom`].
pub fn apply_overrides(
    profile: &mut PolicyProfile,
    graph: &AsGraph,
    text: &str,
) -> Result<(), OverrideError> {
    for (line, toks) in content_lines(text) {
        match toks.as_slice() {
            ["rank", node, rest @ ..] if !rest.is_empty() => {
                let node = parse_id(line, node)?;
                let joined = rest.join(" ");
                let mut preferred = Vec::new();
                for part in joined.split('>') {
                    let route = parse_route(line, part.trim())?;
                    if route.owner() != Some(node) {
                        return Err(OverrideError::NotOwned { line, node, route });
                    }
                    preferred.push(route);
                }
                let policy = profile
                    .get_mut(node)
                    .ok_or(OverrideError::NoPolicy { line, node })?;
                policy.ranking.ranking = Ranking::Custom { preferred };
                profile.mode = ProfileMode::Custom;
            }
            ["export", node, neighbor, verdict, what] => {
                let node = parse_id(line, node)?;
                let neighbor = parse_id(line, neighbor)?;
                let allow = match *verdict {
                    "allow" => true,
                    "deny" => false,
                    other => {
                        return Err(
                            syntax(line, format!("expected allow|deny, got `{other}`")).into()
                        )
                    }
                };
                let route = match *what {
                    "all" => None,
                    r => Some(parse_route(line, r)?),
                };
                if !graph.adjacent(node, neighbor) {
                    return Err(OverrideError::NotAdjacent {
                        line,
                        node,
                        neighbor,
                    });
                }
                let policy = profile
                    .get_mut(node)
                    .ok_or(OverrideError::NoPolicy { line, node })?;
                policy.export.overrides.push(ExportOverride {
                    neighbor,
                    route,
                    allow,
                });
            }
            _ => {
                return Err(syntax(line, format!("unrecognized line `{}`", toks.join(" "))).into())
            }
        }
    }
    Ok(())
}
