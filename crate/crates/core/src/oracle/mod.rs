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

//! Constructive stable assignments.
//!
//! [`fsr`] and [`fr`] fix nodes one at a time to routes that no later step can
//! improve on, shrinking the other nodes' perceivable sets as they go. The
//! resulting assignment is the one the dynamics settle on, and the phase a
//! node was fixed in bounds the round by which it settles.

mod perceivable;

pub use perceivable::{all_perceivable, perceivable_routes, PerceivableRouteSet};

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{AsGraph, GraphError, NodeId};
use crate::policy::{class_via, tie_break, ProfileMode, RankingFunction, Route, RouteClass};
use crate::seed::hash_words;
use crate::Instance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("node {0} is not an honest source")]
    NotHonest(NodeId),
    #[error("best routes of node {owner} leave through different next hops: {routes:?}")]
    SplitNextHop { owner: NodeId, routes: Vec<Route> },
    #[error("witness walk from node {0} did not reach a fixed next hop within the node count")]
    WalkOverflow(NodeId),
    #[error("node {node} reached by the witness walk has no {class:?} route as its best")]
    WalkBroken { node: NodeId, class: RouteClass },
    #[error("no unfixed node has a {0:?} route as its best")]
    NoCandidate(RouteClass),
    #[error("no node can be fixed, yet {0} remain")]
    Stuck(usize),
    #[error("profile is not {0}")]
    WrongProfile(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Best perceivable routes of a node and their common next hop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BestPerceivable {
    pub owner: NodeId,
    /// Preferred first under the fixed tie-break.
    pub routes: Vec<Route>,
    pub next_hop: Option<NodeId>,
}

impl BestPerceivable {
    pub fn best(&self) -> &Route {
        &self.routes[0]
    }

    pub fn is_empty_route(&self) -> bool {
        self.routes[0].is_empty()
    }
}

/// Maximal routes among `routes` under `ranking`. An empty input, or one
/// where nothing beats the empty route, yields the empty route alone.
pub fn best_perceivable<'r>(
    graph: &AsGraph,
    ranking: &RankingFunction,
    routes: impl IntoIterator<Item = &'r Route>,
) -> Result<BestPerceivable, OracleError> {
    let owner = ranking.owner;
    let mut top = ranking.key(graph, &Route::empty(), None);
    let mut best: Vec<&Route> = Vec::new();
    for r in routes {
        if r.is_empty() {
            continue;
        }
        let key = ranking.key(graph, r, r.next_hop().and_then(|n| graph.idx(n)));
        if key > top {
            top = key;
            best.clear();
            best.push(r);
        } else if key == top && !best.is_empty() {
            best.push(r);
        }
    }
    if best.is_empty() {
        return Ok(BestPerceivable {
            owner,
            routes: vec![Route::empty()],
            next_hop: None,
        });
    }
    let next_hop = best[0].next_hop();
    if best.iter().any(|r| r.next_hop() != next_hop) {
        return Err(OracleError::SplitNextHop {
            owner,
            routes: best.into_iter().cloned().collect(),
        });
    }
    let via = next_hop.and_then(|n| graph.idx(n)).unwrap_or(0);
    let mut routes: Vec<Route> = best.into_iter().cloned().collect();
    routes.sort_by(|a, b| tie_break((b, via), (a, via)));
    Ok(BestPerceivable {
        owner,
        routes,
        next_hop,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Phase {
    Fsr,
    Fcr,
    Fpeer,
    Fprv,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::Fsr => "FSR",
            Phase::Fcr => "FCR",
            Phase::Fpeer => "FPeeR",
            Phase::Fprv => "FPrvR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedEntry {
    pub route: Route,
    pub phase: Phase,
    /// Position in the fixing order, from 0.
    pub order: usize,
    /// Round by which the dynamics must have settled on `route`.
    pub bound: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedAssignment {
    pub entries: BTreeMap<NodeId, FixedEntry>,
    /// Seed of the arbitrary-node permutation.
    pub seed: u64,
    /// Hierarchy depth used for the bounds, commercial profiles only.
    pub depth: Option<usize>,
}

impl FixedAssignment {
    pub fn routes(&self) -> BTreeMap<NodeId, Route> {
        self.entries
            .iter()
            .map(|(k, e)| (*k, e.route.clone()))
            .collect()
    }

    pub fn bound(&self, node: NodeId) -> Option<u32> {
        self.entries.get(&node).map(|e| e.bound)
    }

    pub fn max_bound(&self) -> u32 {
        self.entries.values().map(|e| e.bound).max().unwrap_or(0)
    }

    /// Nodes in fixing order.
    pub fn order(&self) -> Vec<NodeId> {
        let mut v: Vec<(usize, NodeId)> = self.entries.iter().map(|(k, e)| (e.order, *k)).collect();
        v.sort_unstable();
        v.into_iter().map(|(_, k)| k).collect()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for n in self.order() {
            let e = &self.entries[&n];
            out += &format!(
                "node={} route={} phase={} order={} bound={}\n",
                n,
                e.route,
                e.phase.label(),
                e.order,
                e.bound
            );
        }
        out
    }

    pub fn render_ndjson(&self) -> String {
        let mut out = String::new();
        for n in self.order() {
            let e = &self.entries[&n];
            let rec = serde_json::json!({
                "node": n.0,
                "route": e.route.to_string(),
                "phase": e.phase.label(),
                "order": e.order,
                "bound": e.bound,
            });
            out += &rec.to_string();
            out.push('\n');
        }
        out
    }
}

/// Intermediate state of a fixing run: the fixed set and what every unfixed
/// node can still perceive.
#[derive(Debug, Clone)]
pub struct OracleState<'a> {
    inst: &'a Instance,
    prs: Vec<BTreeSet<Route>>,
    /// In the fixed set: destination, attackers and fixed honest nodes.
    fixed: Vec<bool>,
    entries: BTreeMap<NodeId, FixedEntry>,
    seed: u64,
}

impl<'a> OracleState<'a> {
    pub fn new(inst: &'a Instance, seed: u64) -> Self {
        let g = &inst.graph;
        let fixed = g
            .nodes()
            .iter()
            .map(|n| *n == g.destination() || g.is_attacker(*n))
            .collect();
        OracleState {
            inst,
            prs: all_perceivable(inst),
            fixed,
            entries: BTreeMap::new(),
            seed,
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn is_fixed(&self, node: NodeId) -> bool {
        self.inst.graph.idx(node).is_some_and(|i| self.fixed[i])
    }

    pub fn fixed_route(&self, node: NodeId) -> Option<&Route> {
        self.entries.get(&node).map(|e| &e.route)
    }

    /// Current perceivable routes of `node`.
    pub fn perceivable(&self, node: NodeId) -> Option<&BTreeSet<Route>> {
        self.inst.graph.idx(node).map(|i| &self.prs[i])
    }

    pub fn unfixed(&self) -> impl Iterator<Item = NodeId> + '_ {
        let g = &self.inst.graph;
        (0..g.len()).filter(|i| !self.fixed[*i]).map(|i| g.id_at(i))
    }

    pub fn best(&self, node: NodeId) -> Result<BestPerceivable, OracleError> {
        let g = &self.inst.graph;
        let i = g.idx(node).ok_or(OracleError::NotHonest(node))?;
        let policy = self
            .inst
            .profile
            .get(node)
            .ok_or(OracleError::NotHonest(node))?;
        best_perceivable(g, &policy.ranking, &self.prs[i])
    }

    /// Class of `node`'s best route, `None` when that is the empty route.
    pub fn best_class(&self, node: NodeId) -> Result<Option<RouteClass>, OracleError> {
        let b = self.best(node)?;
        Ok(b.next_hop.and_then(|nh| self.class_of(node, nh)))
    }

    fn class_of(&self, node: NodeId, next_hop: NodeId) -> Option<RouteClass> {
        let g = &self.inst.graph;
        class_via(g, g.idx(node)?, g.idx(next_hop)?)
    }

    fn rank(&self, node: NodeId) -> u64 {
        hash_words(self.seed, [node.0 as u64])
    }

    fn fix(&mut self, node: NodeId, route: Route, phase: Phase, bound: u32) {
        let i = self.inst.graph.idx(node).expect("known node");
        self.fixed[i] = true;
        let order = self.entries.len();
        self.entries.insert(
            node,
            FixedEntry {
                route,
                phase,
                order,
                bound,
            },
        );
    }

    /// Removes routes through the newly fixed `node` that disagree with its
    /// fixed route or that it would not export to its predecessor. With
    /// `upward`, also removes every peer and customer route through it. Only
    /// occurrences ahead of any attacker on the route count.
    fn prune(&mut self, node: NodeId, upward: bool) {
        let g = &self.inst.graph;
        let fixed = self.entries[&node].route.clone();
        let policy = self.inst.profile.get(node);
        let via = fixed.next_hop().and_then(|n| g.idx(n));
        for v in 0..g.len() {
            if self.fixed[v] {
                continue;
            }
            self.prs[v].retain(|r| {
                let Some(pos) = r.position(node) else {
                    return true;
                };
                // hops after an attacker are its fixed claim, not live state
                if r.hops()[..pos].iter().any(|h| g.is_attacker(*h)) {
                    return true;
                }
                if r.suffix_slice(node) != Some(fixed.hops()) || fixed.is_empty() {
                    return false;
                }
                let pred = g.idx(r.hops()[pos - 1]).expect("known node");
                if let Some(p) = policy {
                    if !p.export.permits(g, pred, &fixed, via) {
                        return false;
                    }
                }
                if upward {
                    let nh = r.next_hop().expect("non-empty route");
                    let class = class_via(g, v, g.idx(nh).expect("known node"));
                    if matches!(class, Some(RouteClass::Peer | RouteClass::Customer)) {
                        return false;
                    }
                }
                true
            });
        }
    }

    /// Fixes `node` to its best route, which must leave through the fixed set.
    fn fix_best(&mut self, node: NodeId, phase: Phase, bound: u32) -> Result<Route, OracleError> {
        let b = self.best(node)?;
        let route = b.best().clone();
        self.fix(node, route.clone(), phase, bound);
        Ok(route)
    }

    /// Fixes every unfixed node whose perceivable set holds only the empty
    /// route. Returns how many were fixed.
    fn absorb_trivial(&mut self, phase: Phase, bound: u32) -> usize {
        let trivial: Vec<NodeId> = self
            .unfixed()
            .filter(|n| {
                let i = self.inst.graph.idx(*n).expect("known node");
                self.prs[i].iter().all(Route::is_empty)
            })
            .collect();
        for n in &trivial {
            self.fix(*n, Route::empty(), phase, bound);
            self.prune(*n, false);
        }
        trivial.len()
    }

    /// True when `node` is unfixed, its best route is of `class` and leaves
    /// through the fixed set.
    pub fn lemma_holds(&self, node: NodeId, class: RouteClass) -> bool {
        if self.is_fixed(node) {
            return false;
        }
        let Ok(b) = self.best(node) else { return false };
        match b.next_hop {
            Some(nh) => self.class_of(node, nh) == Some(class) && self.is_fixed(nh),
            None => false,
        }
    }

    fn finish(self, depth: Option<usize>) -> FixedAssignment {
        FixedAssignment {
            entries: self.entries,
            seed: self.seed,
            depth,
        }
    }
}

/// Walks from an unfixed node whose best route is of `class` along best next
/// hops until reaching a node whose next hop is fixed.
fn witness_walk(state: &OracleState<'_>, class: RouteClass) -> Result<NodeId, OracleError> {
    let starts: Vec<NodeId> = state
        .unfixed()
        .filter(|n| matches!(state.best_class(*n), Ok(Some(c)) if c == class))
        .collect();
    let start = starts
        .into_iter()
        .min_by_key(|n| (state.rank(*n), *n))
        .ok_or(OracleError::NoCandidate(class))?;
    let mut cur = start;
    for _ in 0..=state.inst.graph.len() {
        let b = state.best(cur)?;
        let nh = b
            .next_hop
            .ok_or(OracleError::WalkBroken { node: cur, class })?;
        if state.class_of(cur, nh) != Some(class) {
            return Err(OracleError::WalkBroken { node: cur, class });
        }
        if state.is_fixed(nh) {
            return Ok(cur);
        }
        cur = nh;
    }
    Err(OracleError::WalkOverflow(start))
}

/// A node whose best route is a customer route through the fixed set.
pub fn existence_witness_customer(state: &OracleState<'_>) -> Result<NodeId, OracleError> {
    witness_walk(state, RouteClass::Customer)
}

/// A node whose best route is a provider route through the fixed set.
pub fn existence_witness_provider(state: &OracleState<'_>) -> Result<NodeId, OracleError> {
    witness_walk(state, RouteClass::Provider)
}

/// Fixing for shortest-path profiles. A node fixed to a route of length `k`
/// settles within `k` rounds, one fixed to the empty route within `|V|`.
pub fn fsr(inst: &Instance, seed: u64) -> Result<FixedAssignment, OracleError> {
    if inst.profile.mode != ProfileMode::ShortestPath {
        return Err(OracleError::WrongProfile("shortest-path"));
    }
    let n = inst.graph.len() as u32;
    let mut state = OracleState::new(inst, seed);
    loop {
        state.absorb_trivial(Phase::Fsr, n);
        let unfixed: Vec<NodeId> = state.unfixed().collect();
        if unfixed.is_empty() {
            break;
        }
        let mut pick: Option<(usize, u64, NodeId)> = None;
        for v in unfixed {
            let b = state.best(v)?;
            if let Some(nh) = b.next_hop {
                if state.is_fixed(nh) {
                    let cand = (b.best().length(), state.rank(v), v);
                    if pick.is_none_or(|p| cand < p) {
                        pick = Some(cand);
                    }
                }
            }
        }
        let Some((len, _, v)) = pick else {
            return Err(OracleError::Stuck(state.unfixed().count()));
        };
        state.fix_best(v, Phase::Fsr, len as u32)?;
        state.prune(v, false);
    }
    Ok(state.finish(None))
}

/// Fixing for commercial profiles: customer routes, then peer routes, then
/// provider routes. With hierarchy depth `x` the phases settle within `x`,
/// `x + 1` and `2x + 1` rounds.
pub fn fr(inst: &Instance, seed: u64) -> Result<FixedAssignment, OracleError> {
    fr_observed(inst, seed, &mut |_, _, _| {})
}

/// [`fr`], calling `observe` with the state, phase and chosen node right
/// before each node is fixed.
pub fn fr_observed(
    inst: &Instance,
    seed: u64,
    observe: &mut dyn FnMut(&OracleState<'_>, Phase, NodeId),
) -> Result<FixedAssignment, OracleError> {
    if inst.profile.mode != ProfileMode::Commercial {
        return Err(OracleError::WrongProfile("commercial"));
    }
    let x = inst.graph.hierarchy_depth()? as u32;
    let mut state = OracleState::new(inst, seed);

    loop {
        match existence_witness_customer(&state) {
            Ok(j) => {
                observe(&state, Phase::Fcr, j);
                state.fix_best(j, Phase::Fcr, x)?;
                state.prune(j, false);
            }
            Err(OracleError::NoCandidate(_)) => break,
            Err(e) => return Err(e),
        }
    }

    loop {
        let mut pick: Option<(u64, NodeId)> = None;
        for v in state.unfixed() {
            if state.best_class(v)? == Some(RouteClass::Peer) {
                let nh = state.best(v)?.next_hop.expect("peer route has a next hop");
                if !state.is_fixed(nh) {
                    return Err(OracleError::WalkBroken {
                        node: v,
                        class: RouteClass::Peer,
                    });
                }
                let cand = (state.rank(v), v);
                if pick.is_none_or(|p| cand < p) {
                    pick = Some(cand);
                }
            }
        }
        let Some((_, j)) = pick else { break };
        observe(&state, Phase::Fpeer, j);
        state.fix_best(j, Phase::Fpeer, x + 1)?;
        state.prune(j, true);
    }

    loop {
        match existence_witness_provider(&state) {
            Ok(j) => {
                observe(&state, Phase::Fprv, j);
                state.fix_best(j, Phase::Fprv, 2 * x + 1)?;
                state.prune(j, true);
            }
            Err(OracleError::NoCandidate(_)) => break,
            Err(e) => return Err(e),
        }
    }

    state.absorb_trivial(Phase::Fprv, 2 * x + 1);
    let left = state.unfixed().count();
    if left > 0 {
        return Err(OracleError::Stuck(left));
    }
    Ok(state.finish(Some(x as usize)))
}

#[cfg(test)]
mod tests;
