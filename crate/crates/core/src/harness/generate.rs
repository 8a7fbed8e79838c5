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

//! Seeded random instances and initial configurations.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HarnessError;
use crate::attack::{Announcement, AttackSet, FixedRouteAttack};
use crate::engine::InitialConfig;
use crate::graph::{AsGraph, NodeId};
use crate::policy::{
    make_commercial_profile, make_shortest_path_profile, ExportChoice, IntraClassOrder, Route,
};
use crate::Instance;

/// Largest graph the oracle is asked to handle.
pub const MAX_ORACLE_NODES: usize = 16;

fn rng_for(tag: u64, seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(crate::seed::hash_words(tag, [seed]))
}

/// Random attacks for every attacker of `graph`: per neighbor a hijack, a
/// fabricated path through honest nodes, or silence.
pub fn random_attacks(graph: &AsGraph, rng: &mut impl Rng) -> AttackSet {
    let d = graph.destination();
    let honest: Vec<NodeId> = graph.honest_sources().collect();
    let mut set = AttackSet::silent(graph);
    for &a in graph.attackers() {
        let mut attack = FixedRouteAttack::silent(graph, a).expect("attacker in graph");
        let neighbors: Vec<NodeId> = attack.announcements().keys().copied().collect();
        for nb in neighbors {
            let ann = match rng.gen_range(0..10) {
                0..=3 => Announcement::Path(Route::new(vec![a, d])),
                4..=7 => {
                    let mut middle = honest.clone();
                    middle.shuffle(rng);
                    middle.truncate(rng.gen_range(0..=honest.len().min(3)));
                    let mut hops = vec![a];
                    hops.extend(middle);
                    hops.push(d);
                    Announcement::Path(Route::new(hops))
                }
                _ => Announcement::Silence,
            };
            attack.set(nb, ann).expect("neighbor of attacker");
        }
        set.insert(attack);
    }
    set
}

/// Connected random graph on `n` nodes (destination 0), shortest-path
/// rankings, random export subsets and random attacks. `density` is the
/// probability of each extra edge beyond a spanning tree.
pub fn random_shortest_path_instance(
    n: usize,
    attackers: usize,
    density: f64,
    seed: u64,
) -> Result<Instance, HarnessError> {
    if !(2..=MAX_ORACLE_NODES).contains(&n) {
        return Err(HarnessError::Size(n));
    }
    if attackers > n - 2 {
        return Err(HarnessError::TooManyAttackers {
            nodes: n,
            attackers,
        });
    }
    let mut rng = rng_for(0x5b, seed);
    let d = NodeId(0);
    let mut g = AsGraph::new(d);
    for i in 1..n as u32 {
        g.add_node(NodeId(i))?;
    }
    for i in 1..n as u32 {
        let j = rng.gen_range(0..i);
        g.add_plain(NodeId(i), NodeId(j))?;
    }
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            if !g.adjacent(NodeId(i), NodeId(j)) && rng.gen_bool(density.clamp(0.0, 1.0)) {
                g.add_plain(NodeId(i), NodeId(j))?;
            }
        }
    }
    let mut candidates: Vec<u32> = (1..n as u32).collect();
    candidates.shuffle(&mut rng);
    for &a in &candidates[..attackers] {
        g.add_attacker(NodeId(a))?;
    }
    let exports = if rng.gen_bool(0.5) {
        ExportChoice::All
    } else {
        ExportChoice::Seeded {
            permille: rng.gen_range(600..=950),
        }
    };
    let profile = make_shortest_path_profile(&g, rng.gen(), exports);
    let attacks = random_attacks(&g, &mut rng);
    Ok(Instance::new(g, profile, attacks)?)
}

/// Layered customer-provider hierarchy. Level 0 is the top; every node below
/// has one or two providers one level up and peers are sprinkled within
/// levels. The destination (node 0) hangs below or beside the top level.
///
/// With `levels == 1` and the destination beside the top, the hierarchy has
/// no customer-provider edge at all.
pub fn random_commercial_instance(
    levels: usize,
    width: usize,
    attackers: usize,
    seed: u64,
) -> Result<Instance, HarnessError> {
    random_commercial_with(levels, width, attackers, None, seed)
}

/// Like [`random_commercial_instance`], forcing the destination to attach
/// as a customer (`Some(true)`) or a peer (`Some(false)`) of the top level.
pub fn random_commercial_with(
    levels: usize,
    width: usize,
    attackers: usize,
    dest_customer: Option<bool>,
    seed: u64,
) -> Result<Instance, HarnessError> {
    if levels == 0 || width == 0 {
        return Err(HarnessError::Size(0));
    }
    if levels * width < attackers + 1 {
        return Err(HarnessError::TooManyAttackers {
            nodes: levels * width + 1,
            attackers,
        });
    }
    let min_width = (attackers + 1).div_ceil(levels).max(1);
    let mut rng = rng_for(0xc0, seed);
    let d = NodeId(0);
    let mut g = AsGraph::new(d);
    let mut next = 1u32;
    let mut layers: Vec<Vec<NodeId>> = Vec::new();
    for _ in 0..levels {
        let w = rng.gen_range(min_width..=width);
        let layer: Vec<NodeId> = (0..w).map(|k| NodeId(next + k as u32)).collect();
        next += w as u32;
        for n in &layer {
            g.add_node(*n)?;
        }
        layers.push(layer);
    }
    if g.len() > MAX_ORACLE_NODES {
        return Err(HarnessError::Size(g.len()));
    }
    for l in 1..levels {
        for &c in &layers[l] {
            let above = &layers[l - 1];
            let k = rng.gen_range(1..=above.len().min(2));
            for &p in above.choose_multiple(&mut rng, k) {
                g.add_customer(c, p)?;
            }
        }
    }
    for layer in &layers {
        for (a, &u) in layer.iter().enumerate() {
            for &v in &layer[a + 1..] {
                if rng.gen_bool(0.3) {
                    g.add_peer(u, v)?;
                }
            }
        }
    }
    let as_customer = dest_customer.unwrap_or_else(|| rng.gen_bool(0.5));
    let top = &layers[0];
    let k = rng.gen_range(1..=top.len());
    for &t in top.choose_multiple(&mut rng, k) {
        if as_customer {
            g.add_customer(d, t)?;
        } else {
            g.add_peer(d, t)?;
        }
    }
    let mut candidates: Vec<u32> = (1..next).collect();
    candidates.shuffle(&mut rng);
    for &a in &candidates[..attackers] {
        g.add_attacker(NodeId(a))?;
    }
    let intra = if rng.gen_bool(0.5) {
        IntraClassOrder::PreferShorter
    } else {
        IntraClassOrder::SeededArbitrary
    };
    let profile = make_commercial_profile(&g, rng.gen(), intra)?;
    let attacks = random_attacks(&g, &mut rng);
    Ok(Instance::new(g, profile, attacks)?)
}

/// A commercial instance whose hierarchy depth is exactly `depth`.
pub fn commercial_with_depth(
    depth: usize,
    attackers: usize,
    seed: u64,
) -> Result<Instance, HarnessError> {
    let (levels, dest_customer) = match depth {
        0 => (1, Some(false)),
        1 if seed.is_multiple_of(2) => (1, Some(true)),
        1 => (2, None),
        _ => (depth + 1, None),
    };
    let width = (11 / levels).clamp(1, 3);
    let inst = random_commercial_with(levels, width, attackers, dest_customer, seed)?;
    if inst.graph.hierarchy_depth()? != depth {
        return Err(HarnessError::Depth(depth));
    }
    Ok(inst)
}

/// Random simple route from `owner` to the destination whose first hop is a
/// real neighbor; the rest need not exist.
fn arbitrary_route(graph: &AsGraph, owner: NodeId, rng: &mut impl Rng) -> Route {
    let d = graph.destination();
    let neighbors = graph.neighbors(owner).expect("known node");
    let Some(&(nb, _)) = neighbors.choose(rng) else {
        return Route::empty();
    };
    let mut hops = vec![owner, nb];
    if nb != d {
        let mut rest: Vec<NodeId> = graph
            .nodes()
            .iter()
            .copied()
            .filter(|n| !hops.contains(n) && *n != d)
            .collect();
        rest.shuffle(rng);
        rest.truncate(rng.gen_range(0..=rest.len().min(3)));
        hops.extend(rest);
        hops.push(d);
    }
    Route::new(hops)
}

/// Every honest node on an arbitrary route (or empty), every belief the
/// matching export.
pub fn random_initial_config(inst: &Instance, seed: u64) -> InitialConfig {
    let mut rng = rng_for(0x1c, seed);
    let selections: BTreeMap<NodeId, Route> = inst
        .graph
        .honest_sources()
        .map(|n| {
            let r = if rng.gen_bool(0.2) {
                Route::empty()
            } else {
                arbitrary_route(&inst.graph, n, &mut rng)
            };
            (n, r)
        })
        .collect();
    InitialConfig::consistent(inst, selections)
}

/// The all-empty start followed by `count - 1` random ones.
pub fn initial_configs(inst: &Instance, count: usize, seed: u64) -> Vec<InitialConfig> {
    (0..count)
        .map(|k| {
            if k == 0 {
                InitialConfig::empty()
            } else {
                random_initial_config(inst, seed ^ (k as u64) << 32)
            }
        })
        .collect()
}
