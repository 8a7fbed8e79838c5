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

//! AS-level topology: nodes, business relationships, the destination and the
//! attacker set.
//!
//! Node ids are arbitrary non-negative integers. Internally every node also has
//! a dense index (its position in the sorted id list); the simulator and the
//! oracles work on those indices.

mod topology;

pub(crate) use topology::{content_lines, parse_id, syntax};
pub use topology::{parse_topology, write_topology, ParseError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of an autonomous system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Label of an undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relationship {
    /// `customer` pays `provider`.
    CustomerToProvider {
        customer: NodeId,
        provider: NodeId,
    },
    Peer,
    /// No business meaning; only valid outside commercial systems.
    Unlabeled,
}

/// What a neighbor is, seen from one endpoint of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Customer,
    Provider,
    Peer,
    Unlabeled,
}

/// Which policy family a graph is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    ShortestPath,
    Commercial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub rel: Relationship,
}

impl Edge {
    /// Role of the far endpoint as seen from `from`.
    pub fn role_from(&self, from: NodeId) -> Role {
        match self.rel {
            Relationship::Peer => Role::Peer,
            Relationship::Unlabeled => Role::Unlabeled,
            Relationship::CustomerToProvider { customer, .. } => {
                if from == customer {
                    Role::Provider
                } else {
                    Role::Customer
                }
            }
        }
    }

    pub fn other(&self, from: NodeId) -> NodeId {
        if from == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Structural errors: the graph cannot be represented at all.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} declared twice")]
    DuplicateNode(NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("destination {0} cannot be an attacker")]
    DestinationIsAttacker(NodeId),
    #[error("customer-provider cycle through {0:?}")]
    CustomerProviderCycle(Vec<NodeId>),
}

/// Semantic problems reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// Nodes of a directed customer-to-provider cycle, in customer order.
    CustomerProviderCycle(Vec<NodeId>),
    UnlabeledEdge(NodeId, NodeId),
    ParallelEdge(NodeId, NodeId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CustomerProviderCycle(c) => {
                let ids: Vec<String> = c.iter().map(|n| n.to_string()).collect();
                write!(f, "customer-provider cycle [{}]", ids.join(","))
            }
            Violation::UnlabeledEdge(a, b) => {
                write!(f, "unlabeled edge {a}-{b} in commercial mode")
            }
            Violation::ParallelEdge(a, b) => write!(f, "parallel edges between {a} and {b}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Undirected AS graph with relationships, a destination and attackers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsGraph {
    ids: Vec<NodeId>,
    index: BTreeMap<NodeId, usize>,
    destination: NodeId,
    attackers: BTreeSet<NodeId>,
    edges: Vec<Edge>,
    /// Dense adjacency: neighbor index and role, sorted by neighbor index.
    adj: Vec<Vec<(usize, Role)>>,
}

impl AsGraph {
    /// Creates a graph holding only the destination.
    pub fn new(destination: NodeId) -> Self {
        let mut g = AsGraph {
            ids: Vec::new(),
            index: BTreeMap::new(),
            destination,
            attackers: BTreeSet::new(),
            edges: Vec::new(),
            adj: Vec::new(),
        };
        g.insert_node(destination);
        g
    }

    fn insert_node(&mut self, id: NodeId) {
        let pos = self.ids.partition_point(|n| *n < id);
        self.ids.insert(pos, id);
        self.reindex();
    }

    fn reindex(&mut self) {
        self.index = self.ids.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut adj = vec![Vec::new(); self.ids.len()];
        for e in &self.edges {
            let (ia, ib) = (self.index[&e.a], self.index[&e.b]);
            if !adj[ia].iter().any(|(n, _)| *n == ib) {
                adj[ia].push((ib, e.role_from(e.a)));
            }
            if !adj[ib].iter().any(|(n, _)| *n == ia) {
                adj[ib].push((ia, e.role_from(e.b)));
            }
        }
        for list in &mut adj {
            list.sort_by_key(|(n, _)| *n);
        }
        self.adj = adj;
    }

    pub fn add_node(&mut self, id: NodeId) -> Result<(), GraphError> {
        if self.index.contains_key(&id) {
            return Err(GraphError::DuplicateNode(id));
        }
        self.insert_node(id);
        Ok(())
    }

    pub fn add_attacker(&mut self, id: NodeId) -> Result<(), GraphError> {
        if id == self.destination {
            return Err(GraphError::DestinationIsAttacker(id));
        }
        if !self.index.contains_key(&id) {
            self.insert_node(id);
        }
        self.attackers.insert(id);
        Ok(())
    }

    /// Marks an existing node as honest again.
    pub fn remove_attacker(&mut self, id: NodeId) -> bool {
        self.attackers.remove(&id)
    }

    /// Adds an edge between existing nodes.
    ///
    /// A pair may carry two edges only when both are customer-to-provider
    /// edges pointing in opposite directions; that graph is representable so
    /// that [`validate`] can report the resulting two-cycle.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId, rel: Relationship) -> Result<(), GraphError> {
        for n in [a, b] {
            if !self.index.contains_key(&n) {
                return Err(GraphError::UnknownNode(n));
            }
        }
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        if let Relationship::CustomerToProvider { customer, provider } = rel {
            if !((customer == a && provider == b) || (customer == b && provider == a)) {
                return Err(GraphError::UnknownNode(customer));
            }
        }
        for e in self
            .edges
            .iter()
            .filter(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
        {
            let opposite_p2c = matches!(
                (e.rel, rel),
                (
                    Relationship::CustomerToProvider { customer: c1, .. },
                    Relationship::CustomerToProvider { customer: c2, .. },
                ) if c1 != c2
            );
            if !opposite_p2c {
                return Err(GraphError::DuplicateEdge(a, b));
            }
        }
        self.edges.push(Edge { a, b, rel });
        self.reindex();
        Ok(())
    }

    pub fn add_peer(&mut self, a: NodeId, b: NodeId) -> Result<(), GraphError> {
        self.add_edge(a, b, Relationship::Peer)
    }

    pub fn add_plain(&mut self, a: NodeId, b: NodeId) -> Result<(), GraphError> {
        self.add_edge(a, b, Relationship::Unlabeled)
    }

    pub fn add_customer(&mut self, customer: NodeId, provider: NodeId) -> Result<(), GraphError> {
        self.add_edge(
            customer,
            provider,
            Relationship::CustomerToProvider { customer, provider },
        )
    }

    pub fn destination(&self) -> NodeId {
        self.destination
    }

    pub fn attackers(&self) -> &BTreeSet<NodeId> {
        &self.attackers
    }

    pub fn is_attacker(&self, id: NodeId) -> bool {
        self.attackers.contains(&id)
    }

    /// Nodes that rank and export: everything but the destination and attackers.
    pub fn honest_sources(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids
            .iter()
            .copied()
            .filter(move |n| *n != self.destination && !self.attackers.contains(n))
    }

    /// Sorted node ids.
    pub fn nodes(&self) -> &[NodeId] {
        &self.ids
    }

    /// Number of source nodes (every node but the destination).
    pub fn source_count(&self) -> usize {
        self.ids.len() - 1
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn idx(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn id_at(&self, idx: usize) -> NodeId {
        self.ids[idx]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Dense adjacency of the node at `idx`.
    pub fn adjacency(&self, idx: usize) -> &[(usize, Role)] {
        &self.adj[idx]
    }

    /// Neighbors of `node` and their role as seen from `node`.
    pub fn neighbors(&self, node: NodeId) -> Result<Vec<(NodeId, Role)>, GraphError> {
        let i = self.idx(node).ok_or(GraphError::UnknownNode(node))?;
        Ok(self.adj[i]
            .iter()
            .map(|(j, r)| (self.ids[*j], *r))
            .collect())
    }

    /// Role of `neighbor` seen from `node`, or `None` when they are not adjacent.
    pub fn role(&self, node: NodeId, neighbor: NodeId) -> Option<Role> {
        let (i, j) = (self.idx(node)?, self.idx(neighbor)?);
        self.role_idx(i, j)
    }

    pub fn role_idx(&self, i: usize, j: usize) -> Option<Role> {
        let list = &self.adj[i];
        list.binary_search_by_key(&j, |(n, _)| *n)
            .ok()
            .map(|p| list[p].1)
    }

    pub fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.role(a, b).is_some()
    }

    fn p2c_arcs(&self) -> Vec<Vec<usize>> {
        let mut up = vec![Vec::new(); self.ids.len()];
        for e in &self.edges {
            if let Relationship::CustomerToProvider { customer, provider } = e.rel {
                up[self.index[&customer]].push(self.index[&provider]);
            }
        }
        up
    }

    /// Every directed customer-to-provider cycle closed by a DFS back edge.
    fn p2c_cycles(&self) -> Vec<Vec<NodeId>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let up = self.p2c_arcs();
        let mut mark = vec![Mark::New; up.len()];
        let mut cycles = Vec::new();
        for root in 0..up.len() {
            if mark[root] != Mark::New {
                continue;
            }
            // (node, next arc position)
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            mark[root] = Mark::Open;
            while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
                if *pos < up[v].len() {
                    let w = up[v][*pos];
                    *pos += 1;
                    match mark[w] {
                        Mark::New => {
                            mark[w] = Mark::Open;
                            stack.push((w, 0));
                        }
                        Mark::Open => {
                            let start = stack.iter().position(|(n, _)| *n == w).unwrap();
                            cycles.push(stack[start..].iter().map(|(n, _)| self.ids[*n]).collect());
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[v] = Mark::Done;
                    stack.pop();
                }
            }
        }
        cycles
    }

    /// Length in edges of the longest customer-to-provider chain.
    pub fn hierarchy_depth(&self) -> Result<usize, GraphError> {
        if let Some(c) = self.p2c_cycles().into_iter().next() {
            return Err(GraphError::CustomerProviderCycle(c));
        }
        let up = self.p2c_arcs();
        let mut memo: Vec<Option<usize>> = vec![None; up.len()];
        fn longest(v: usize, up: &[Vec<usize>], memo: &mut [Option<usize>]) -> usize {
            if let Some(d) = memo[v] {
                return d;
            }
            let d = up[v]
                .iter()
                .map(|w| 1 + longest(*w, up, memo))
                .max()
                .unwrap_or(0);
            memo[v] = Some(d);
            d
        }
        Ok((0..up.len())
            .map(|v| longest(v, &up, &mut memo))
            .max()
            .unwrap_or(0))
    }
}

/// Checks the semantic invariants of `graph` for `mode`.
pub fn validate(graph: &AsGraph, mode: Mode) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen = BTreeSet::new();
    for e in graph.edges() {
        let key = (e.a.min(e.b), e.a.max(e.b));
        if !seen.insert(key) {
            violations.push(Violation::ParallelEdge(key.0, key.1));
        }
    }
    if mode == Mode::Commercial {
        for e in graph.edges() {
            if e.rel == Relationship::Unlabeled {
                violations.push(Violation::UnlabeledEdge(e.a, e.b));
            }
        }
        violations.extend(
            graph
                .p2c_cycles()
                .into_iter()
                .map(Violation::CustomerProviderCycle),
        );
    }
    ValidationReport { violations }
}
