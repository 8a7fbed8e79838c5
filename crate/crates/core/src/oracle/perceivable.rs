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

//! Perceivable routes.
//!
//! A route is perceivable at its owner if it could reach the owner hop by
//! hop, each hop permitted by the exporting node's policy, starting either
//! at the destination or at an attacker's fixed announcement to its
//! neighbor. Sets are built by propagating backwards from those origins.

use std::collections::BTreeSet;

use serde::Serialize;

use super::OracleError;
use crate::attack::Announcement;
use crate::graph::NodeId;
use crate::policy::Route;
use crate::Instance;

/// Perceivable routes of one honest node, always including the empty route.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerceivableRouteSet {
    pub owner: NodeId,
    pub routes: BTreeSet<Route>,
}

impl PerceivableRouteSet {
    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    /// Only the empty route is left.
    pub fn is_trivial(&self) -> bool {
        self.routes.iter().all(Route::is_empty)
    }
}

/// Perceivable sets of every node, indexed densely; non-honest nodes get
/// empty sets.
pub fn all_perceivable(inst: &Instance) -> Vec<BTreeSet<Route>> {
    let g = &inst.graph;
    let d = g.destination();
    let honest = |i: usize| {
        let id = g.id_at(i);
        id != d && !g.is_attacker(id)
    };
    let mut sets: Vec<BTreeSet<Route>> = (0..g.len())
        .map(|i| {
            if honest(i) {
                BTreeSet::from([Route::empty()])
            } else {
                BTreeSet::new()
            }
        })
        .collect();
    let mut work: Vec<(usize, Route)> = Vec::new();
    let dest_idx = g.idx(d).expect("destination in graph");
    work.push((dest_idx, Route::new(vec![d])));

    for attack in inst.attacks.iter() {
        for (nb, ann) in attack.announcements() {
            let Announcement::Path(r) = ann else { continue };
            let Some(j) = g.idx(*nb) else { continue };
            if !honest(j) || !r.is_simple() || r.contains(*nb) || r.owner() != Some(attack.attacker)
            {
                continue;
            }
            if r.last() != Some(d) || r.hops()[1..].iter().any(|h| g.is_attacker(*h)) {
                continue;
            }
            let route = r.extended_by(*nb);
            if sets[j].insert(route.clone()) {
                work.push((j, route));
            }
        }
    }

    while let Some((k, content)) = work.pop() {
        let kid = g.id_at(k);
        let policy = if kid == d {
            None
        } else {
            inst.profile.get(kid)
        };
        let via = content.next_hop().and_then(|n| g.idx(n));
        for &(j, _) in g.adjacency(k) {
            if !honest(j) || content.contains(g.id_at(j)) {
                continue;
            }
            if let Some(p) = policy {
                if !p.export.permits(g, j, &content, via) {
                    continue;
                }
            }
            let route = content.extended_by(g.id_at(j));
            if sets[j].insert(route.clone()) {
                work.push((j, route));
            }
        }
    }
    sets
}

/// Perceivable routes of an honest source node.
pub fn perceivable_routes(
    inst: &Instance,
    owner: NodeId,
) -> Result<PerceivableRouteSet, OracleError> {
    let g = &inst.graph;
    let i = g.idx(owner).ok_or(OracleError::NotHonest(owner))?;
    if owner == g.destination() || g.is_attacker(owner) {
        return Err(OracleError::NotHonest(owner));
    }
    let mut all = all_perceivable(inst);
    Ok(PerceivableRouteSet {
        owner,
        routes: std::mem::take(&mut all[i]),
    })
}
