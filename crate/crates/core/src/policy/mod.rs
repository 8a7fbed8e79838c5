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

//! Ranking functions, export policies and the two policy families
//! (shortest-path and commercial).
//!
//! Rankings are comparators: the route universe of a node includes sequences
//! that do not exist in the graph, so nothing is ever enumerated here.

mod overrides;
mod route;

pub use overrides::{apply_overrides, OverrideError};
pub use route::{Route, RouteParseError};

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{validate, AsGraph, Mode, NodeId, Role, Violation};
use crate::seed::hash_words;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("route {route} is not owned by node {owner}")]
    NotOwned { owner: NodeId, route: Route },
    #[error("route {0} has a second hop that is not adjacent to its owner")]
    MalformedRoute(Route),
    #[error("empty route has no class")]
    EmptyRoute,
    #[error("graph is not valid for this profile: {0:?}")]
    InvalidGraph(Vec<Violation>),
    #[error("node {0} has no policy")]
    NoPolicy(NodeId),
}

/// Business class of a route, from its owner's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RouteClass {
    Provider,
    Peer,
    Customer,
    /// The route `(d)` held by the destination itself.
    SelfDestination,
}

/// Outcome of comparing two routes under one ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    FirstBetter,
    SecondBetter,
    Tied,
}

/// Class of a route whose owner learned it from neighbor `via`.
///
/// Unlabeled edges count as customer edges.
pub fn class_via(graph: &AsGraph, owner_idx: usize, via_idx: usize) -> Option<RouteClass> {
    graph.role_idx(owner_idx, via_idx).map(|r| match r {
        Role::Customer | Role::Unlabeled => RouteClass::Customer,
        Role::Peer => RouteClass::Peer,
        Role::Provider => RouteClass::Provider,
    })
}

/// Class of a non-empty route, decided by the role of its second hop.
pub fn classify_route(graph: &AsGraph, route: &Route) -> Result<RouteClass, PolicyError> {
    let owner = route.owner().ok_or(PolicyError::EmptyRoute)?;
    if route.hops() == [graph.destination()] {
        return Ok(RouteClass::SelfDestination);
    }
    let next = route
        .next_hop()
        .ok_or_else(|| PolicyError::MalformedRoute(route.clone()))?;
    let (oi, ni) = graph
        .idx(owner)
        .zip(graph.idx(next))
        .ok_or_else(|| PolicyError::MalformedRoute(route.clone()))?;
    class_via(graph, oi, ni).ok_or_else(|| PolicyError::MalformedRoute(route.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntraClassOrder {
    /// Shorter routes first, then a seeded next-hop order.
    PreferShorter,
    /// A seeded order over whole routes.
    SeededArbitrary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassOrder {
    /// customer > peer > provider.
    PeerOverProvider,
    /// customer > {peer, provider}, the latter two interleaved by the
    /// intra-class order.
    PeerWithProvider,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ranking {
    ShortestPath {
        seed: u64,
    },
    Commercial {
        seed: u64,
        intra: IntraClassOrder,
        classes: ClassOrder,
    },
    /// Listed routes best first, then the empty route, then every unlisted
    /// route (shorter first).
    Custom {
        preferred: Vec<Route>,
    },
}

/// Totally ordered rank of a candidate; larger is better. Two candidates tie
/// exactly when their keys are equal, which only happens for equal next hops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankKey(u8, i64, u64, u64);

const EMPTY_KEY: RankKey = RankKey(0, 0, 0, 0);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingFunction {
    pub owner: NodeId,
    pub ranking: Ranking,
}

impl RankingFunction {
    fn next_hop_rank(seed: u64, owner: NodeId, via: NodeId) -> u64 {
        hash_words(seed, [owner.0 as u64, via.0 as u64])
    }

    /// Rank of `route` learned from the neighbor at dense index `via_idx`.
    pub fn key(&self, graph: &AsGraph, route: &Route, via_idx: Option<usize>) -> RankKey {
        if route.is_empty() {
            return match self.ranking {
                Ranking::Custom { .. } => RankKey(1, 0, 0, 0),
                _ => EMPTY_KEY,
            };
        }
        let via = via_idx
            .map(|i| graph.id_at(i))
            .or(route.next_hop())
            .unwrap_or(self.owner);
        let len = route.length() as i64;
        match &self.ranking {
            Ranking::ShortestPath { seed } => RankKey(
                1,
                -len,
                Self::next_hop_rank(*seed, self.owner, via),
                via.0 as u64,
            ),
            Ranking::Commercial {
                seed,
                intra,
                classes,
            } => {
                let class = match (graph.idx(self.owner), via_idx.or_else(|| graph.idx(via))) {
                    (Some(o), Some(v)) => class_via(graph, o, v).unwrap_or(RouteClass::Provider),
                    _ => RouteClass::Provider,
                };
                let tier = match (class, classes) {
                    (RouteClass::Customer | RouteClass::SelfDestination, _) => 3,
                    (RouteClass::Peer, ClassOrder::PeerOverProvider) => 2,
                    (RouteClass::Peer, ClassOrder::PeerWithProvider) => 1,
                    (RouteClass::Provider, _) => 1,
                };
                match intra {
                    IntraClassOrder::PreferShorter => RankKey(
                        tier,
                        -len,
                        Self::next_hop_rank(*seed, self.owner, via),
                        via.0 as u64,
                    ),
                    IntraClassOrder::SeededArbitrary => {
                        let h = hash_words(*seed ^ 0x5eed, route.hops().iter().map(|n| n.0 as u64));
                        RankKey(tier, 0, h, via.0 as u64)
                    }
                }
            }
            Ranking::Custom { preferred } => match preferred.iter().position(|r| r == route) {
                Some(p) => RankKey(2, -(p as i64), 0, 0),
                None => RankKey(0, -len, 0, via.0 as u64),
            },
        }
    }

    /// Compares two routes of this ranking's owner.
    pub fn compare(
        &self,
        graph: &AsGraph,
        a: &Route,
        b: &Route,
    ) -> Result<Preference, PolicyError> {
        for r in [a, b] {
            if !r.is_empty() && r.owner() != Some(self.owner) {
                return Err(PolicyError::NotOwned {
                    owner: self.owner,
                    route: r.clone(),
                });
            }
        }
        let (ka, kb) = (self.key(graph, a, None), self.key(graph, b, None));
        Ok(match ka.cmp(&kb) {
            Ordering::Greater => Preference::FirstBetter,
            Ordering::Less => Preference::SecondBetter,
            Ordering::Equal => Preference::Tied,
        })
    }
}

/// Fixed tie-break among equally ranked candidates: lexicographically smaller
/// hop sequence wins, then the smaller arrival neighbor.
pub fn tie_break(a: (&Route, usize), b: (&Route, usize)) -> Ordering {
    b.0.hops().cmp(a.0.hops()).then(b.1.cmp(&a.1))
}

/// [`RankingFunction::compare`] as a free function.
pub fn rank_compare(
    graph: &AsGraph,
    ranking: &RankingFunction,
    a: &Route,
    b: &Route,
) -> Result<Preference, PolicyError> {
    ranking.compare(graph, a, b)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExportRule {
    All,
    /// Customer routes to everyone; peer and provider routes to customers only.
    Commercial,
    /// A seeded pseudo-random subset, `permille` of (neighbor, route) pairs.
    SeededSubset {
        seed: u64,
        permille: u16,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportOverride {
    pub neighbor: NodeId,
    /// `None` matches every route.
    pub route: Option<Route>,
    pub allow: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportPolicy {
    pub owner: NodeId,
    pub rule: ExportRule,
    /// Checked in order before `rule`; first match decides.
    pub overrides: Vec<ExportOverride>,
}

impl ExportPolicy {
    /// Whether `route`, learned from `via_idx`, may be sent to `neighbor_idx`.
    /// The empty route is always allowed.
    pub fn permits(
        &self,
        graph: &AsGraph,
        neighbor_idx: usize,
        route: &Route,
        via_idx: Option<usize>,
    ) -> bool {
        if route.is_empty() {
            return true;
        }
        let neighbor = graph.id_at(neighbor_idx);
        for o in &self.overrides {
            if o.neighbor == neighbor && o.route.as_ref().is_none_or(|r| r == route) {
                return o.allow;
            }
        }
        match &self.rule {
            ExportRule::All => true,
            ExportRule::Commercial => {
                let Some(owner_idx) = graph.idx(self.owner) else {
                    return false;
                };
                let via = via_idx.or_else(|| route.next_hop().and_then(|n| graph.idx(n)));
                let class = via.and_then(|v| class_via(graph, owner_idx, v));
                class == Some(RouteClass::Customer)
                    || matches!(
                        graph.role_idx(owner_idx, neighbor_idx),
                        Some(Role::Customer | Role::Unlabeled)
                    )
            }
            ExportRule::SeededSubset { seed, permille } => {
                let h = hash_words(
                    *seed,
                    [self.owner.0 as u64, neighbor.0 as u64]
                        .into_iter()
                        .chain(route.hops().iter().map(|n| n.0 as u64)),
                );
                h % 1000 < *permille as u64
            }
        }
    }

    pub fn permit(&self, graph: &AsGraph, neighbor: NodeId, route: &Route) -> bool {
        graph
            .idx(neighbor)
            .is_some_and(|j| self.permits(graph, j, route, None))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePolicy {
    pub ranking: RankingFunction,
    pub export: ExportPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProfileMode {
    ShortestPath,
    Commercial,
    Custom,
}

/// One ranking and one export policy per honest source node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyProfile {
    pub mode: ProfileMode,
    pub policies: BTreeMap<NodeId, NodePolicy>,
}

impl PolicyProfile {
    pub fn get(&self, node: NodeId) -> Option<&NodePolicy> {
        self.policies.get(&node)
    }

    pub fn get_mut(&mut self, node: NodeId) -> Option<&mut NodePolicy> {
        self.policies.get_mut(&node)
    }

    /// Every honest source of `graph` has a policy.
    pub fn covers(&self, graph: &AsGraph) -> Result<(), PolicyError> {
        match graph
            .honest_sources()
            .find(|n| !self.policies.contains_key(n))
        {
            Some(n) => Err(PolicyError::NoPolicy(n)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExportChoice {
    All,
    /// Seeded subsets keeping `permille`/1000 of pairs.
    Seeded {
        permille: u16,
    },
}

/// Shortest-path rankings for every honest source. Equal-length routes are
/// ordered by a seeded next-hop order, so ties only remain between routes
/// with the same next hop.
pub fn make_shortest_path_profile(
    graph: &AsGraph,
    tie_seed: u64,
    exports: ExportChoice,
) -> PolicyProfile {
    let policies = graph
        .honest_sources()
        .map(|owner| {
            let rule = match exports {
                ExportChoice::All => ExportRule::All,
                ExportChoice::Seeded { permille } => ExportRule::SeededSubset {
                    seed: hash_words(tie_seed, [0xe4, owner.0 as u64]),
                    permille,
                },
            };
            let policy = NodePolicy {
                ranking: RankingFunction {
                    owner,
                    ranking: Ranking::ShortestPath { seed: tie_seed },
                },
                export: ExportPolicy {
                    owner,
                    rule,
                    overrides: Vec::new(),
                },
            };
            (owner, policy)
        })
        .collect();
    PolicyProfile {
        mode: ProfileMode::ShortestPath,
        policies,
    }
}

/// Gao-Rexford rankings and exports for every honest source.
pub fn make_commercial_profile(
    graph: &AsGraph,
    tie_seed: u64,
    intra: IntraClassOrder,
) -> Result<PolicyProfile, PolicyError> {
    make_commercial_profile_with(graph, tie_seed, intra, ClassOrder::PeerOverProvider)
}

pub fn make_commercial_profile_with(
    graph: &AsGraph,
    tie_seed: u64,
    intra: IntraClassOrder,
    classes: ClassOrder,
) -> Result<PolicyProfile, PolicyError> {
    let report = validate(graph, Mode::Commercial);
    if !report.is_empty() {
        return Err(PolicyError::InvalidGraph(report.violations));
    }
    let policies = graph
        .honest_sources()
        .map(|owner| {
            let policy = NodePolicy {
                ranking: RankingFunction {
                    owner,
                    ranking: Ranking::Commercial {
                        seed: tie_seed,
                        intra,
                        classes,
                    },
                },
                export: ExportPolicy {
                    owner,
                    rule: ExportRule::Commercial,
                    overrides: Vec::new(),
                },
            };
            (owner, policy)
        })
        .collect();
    Ok(PolicyProfile {
        mode: ProfileMode::Commercial,
        policies,
    })
}
