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

//! Routes: node sequences ending at the destination, or the empty route.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::NodeId;

/// A sequence of nodes, owner first. The empty sequence is the empty route.
///
/// Selected routes are always simple and end at the destination. Attacker
/// announcements use the same type but carry no such guarantee.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Route(Vec<NodeId>);

impl Route {
    pub fn empty() -> Self {
        Route(Vec::new())
    }

    pub fn new(hops: Vec<NodeId>) -> Self {
        Route(hops)
    }

    pub fn from_ids(ids: &[u32]) -> Self {
        Route(ids.iter().map(|i| NodeId(*i)).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn hops(&self) -> &[NodeId] {
        &self.0
    }

    pub fn owner(&self) -> Option<NodeId> {
        self.0.first().copied()
    }

    pub fn next_hop(&self) -> Option<NodeId> {
        self.0.get(1).copied()
    }

    pub fn last(&self) -> Option<NodeId> {
        self.0.last().copied()
    }

    /// Number of edges; zero for the empty route and for `(d)`.
    pub fn length(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn position(&self, node: NodeId) -> Option<usize> {
        self.0.iter().position(|n| *n == node)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.0.contains(&node)
    }

    /// Prefix ending at `node`, inclusive.
    pub fn prefix_to(&self, node: NodeId) -> Option<Route> {
        self.position(node).map(|p| Route(self.0[..=p].to_vec()))
    }

    /// Suffix starting at `node`, inclusive.
    pub fn suffix_from(&self, node: NodeId) -> Option<Route> {
        self.position(node).map(|p| Route(self.0[p..].to_vec()))
    }

    pub fn suffix_slice(&self, node: NodeId) -> Option<&[NodeId]> {
        self.position(node).map(|p| &self.0[p..])
    }

    pub fn pred(&self, node: NodeId) -> Option<NodeId> {
        match self.position(node)? {
            0 => None,
            p => Some(self.0[p - 1]),
        }
    }

    pub fn succ(&self, node: NodeId) -> Option<NodeId> {
        self.0.get(self.position(node)? + 1).copied()
    }

    /// No node repeats.
    pub fn is_simple(&self) -> bool {
        let h = &self.0;
        (0..h.len()).all(|i| !h[i + 1..].contains(&h[i]))
    }

    /// `owner` prepended to this sequence.
    pub fn extended_by(&self, owner: NodeId) -> Route {
        let mut hops = Vec::with_capacity(self.0.len() + 1);
        hops.push(owner);
        hops.extend_from_slice(&self.0);
        Route(hops)
    }

    /// A well-formed route owned by `owner` towards `dest`: simple, first hop
    /// `owner`, last hop `dest`.
    pub fn is_valid_for(&self, owner: NodeId, dest: NodeId) -> bool {
        self.owner() == Some(owner) && self.last() == Some(dest) && self.is_simple()
    }
}

impl From<Vec<NodeId>> for Route {
    fn from(hops: Vec<NodeId>) -> Self {
        Route(hops)
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("empty");
        }
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteParseError(pub String);

impl fmt::Display for RouteParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bad route `{}`", self.0)
    }
}

impl std::error::Error for RouteParseError {}

impl FromStr for Route {
    type Err = RouteParseError;

    /// Comma-separated ids, or `empty`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "empty" {
            return Ok(Route::empty());
        }
        s.split(',')
            .map(|t| t.trim().parse::<u32>().map(NodeId))
            .collect::<Result<Vec<_>, _>>()
            .map(Route)
            .map_err(|_| RouteParseError(s.to_string()))
    }
}
