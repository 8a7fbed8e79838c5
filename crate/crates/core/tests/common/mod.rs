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

//! Small instances shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use stablepath::attack::{parse_attacks, Announcement, AttackSet};
use stablepath::graph::{AsGraph, NodeId};
use stablepath::harness::{
    bad_gadget_instance, random_commercial_instance, random_shortest_path_instance,
};
use stablepath::policy::{
    apply_overrides, make_commercial_profile, make_shortest_path_profile, ExportChoice,
    IntraClassOrder, Route,
};
use stablepath::Instance;

pub fn n(i: u32) -> NodeId {
    NodeId(i)
}

fn graph(nodes: u32, attackers: &[u32]) -> AsGraph {
    let mut g = AsGraph::new(n(0));
    for i in 1..nodes {
        if attackers.contains(&i) {
            g.add_attacker(n(i)).unwrap();
        } else {
            g.add_node(n(i)).unwrap();
        }
    }
    g
}

fn plain(g: &mut AsGraph, edges: &[(u32, u32)]) {
    for &(a, b) in edges {
        g.add_plain(n(a), n(b)).unwrap();
    }
}

fn shortest(g: AsGraph, overrides: &str, attacks: &str) -> Instance {
    let mut profile = make_shortest_path_profile(&g, 11, ExportChoice::All);
    apply_overrides(&mut profile, &g, overrides).unwrap();
    let attacks = if attacks.is_empty() {
        AttackSet::silent(&g)
    } else {
        parse_attacks(&g, attacks).unwrap()
    };
    Instance::new(g, profile, attacks).unwrap()
}

/// Hand-built cases.
pub fn hand_built() -> Vec<(String, Instance)> {
    let mut out = Vec::new();

    let mut g = graph(3, &[]);
    plain(&mut g, &[(0, 1), (1, 2)]);
    out.push(("chain".into(), shortest(g, "", "")));

    let mut g = graph(3, &[]);
    plain(&mut g, &[(0, 1), (1, 2), (2, 0)]);
    out.push((
        "triangle_deny".into(),
        shortest(g, "export 1 2 deny 1,0\n", ""),
    ));

    // attacker 3 not adjacent to the destination
    let mut g = graph(4, &[3]);
    plain(&mut g, &[(0, 1), (1, 2), (2, 3), (3, 1)]);
    out.push((
        "hijack_far".into(),
        shortest(g, "", "attack 3 1 3,0\nattack 3 2 3,1,0\n"),
    ));

    // announcement through a node that is not adjacent to the attacker
    let mut g = graph(5, &[4]);
    plain(&mut g, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
    out.push(("fabricated".into(), shortest(g, "", "attack 4 3 4,1,0\n")));

    // two attackers, one silent
    let mut g = graph(6, &[2, 4]);
    plain(
        &mut g,
        &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (1, 3)],
    );
    out.push((
        "two_attackers".into(),
        shortest(
            g,
            "export 3 2 deny all\n",
            "attack 2 1 2,0\nattack 2 3 2,0\n",
        ),
    ));

    out.push(("gadget".into(), bad_gadget_instance(true)));
    out.push(("gadget_pre".into(), bad_gadget_instance(false)));

    // stubs 2 and 3 peer; 1 is their provider and the destination's
    let mut g = graph(4, &[]);
    g.add_customer(n(0), n(1)).unwrap();
    g.add_customer(n(2), n(1)).unwrap();
    g.add_customer(n(3), n(1)).unwrap();
    g.add_peer(n(2), n(3)).unwrap();
    let profile = make_commercial_profile(&g, 3, IntraClassOrder::PreferShorter).unwrap();
    out.push((
        "peer_stubs".into(),
        Instance::new(g.clone(), profile, AttackSet::silent(&g)).unwrap(),
    ));

    out.push(("cone_hijack".into(), cone_hijack()));
    out
}

/// Six nodes: provider 1 of the destination, 1's customers 2 and 3, 3's
/// customer 4 which is the attacker, and 2's customer 5. 4 claims a direct
/// link to the destination.
pub fn cone_hijack() -> Instance {
    let mut g = graph(6, &[4]);
    g.add_customer(n(0), n(1)).unwrap();
    g.add_customer(n(2), n(1)).unwrap();
    g.add_customer(n(3), n(1)).unwrap();
    g.add_customer(n(4), n(3)).unwrap();
    g.add_customer(n(5), n(2)).unwrap();
    g.add_peer(n(2), n(3)).unwrap();
    let profile = make_commercial_profile(&g, 5, IntraClassOrder::PreferShorter).unwrap();
    let attacks = parse_attacks(&g, "attack 4 3 4,0\n").unwrap();
    Instance::new(g, profile, attacks).unwrap()
}

/// Fixed corpus of 50 instances with at most 7 nodes.
pub fn corpus() -> Vec<(String, Instance)> {
    let mut out = hand_built();
    let mut seed = 0u64;
    while out.len() < 34 {
        let nodes = 3 + (seed % 5) as usize;
        let attackers = (seed / 5 % 3) as usize;
        if let Ok(inst) = random_shortest_path_instance(nodes, attackers.min(nodes - 2), 0.35, seed)
        {
            out.push((format!("sp_{seed}"), inst));
        }
        seed += 1;
    }
    let mut seed = 0u64;
    while out.len() < 50 {
        let levels = 1 + (seed % 3) as usize;
        let attackers = (seed / 3 % 2) as usize;
        if let Ok(inst) = random_commercial_instance(levels, 6 / levels, attackers, seed) {
            if inst.graph.len() <= 7 {
                out.push((format!("gr_{seed}"), inst));
            }
        }
        seed += 1;
    }
    out
}

fn sequences(nodes: &[NodeId], prefix: &mut Vec<NodeId>, end: NodeId, out: &mut Vec<Route>) {
    if *prefix.last().unwrap() == end {
        out.push(Route::new(prefix.clone()));
        return;
    }
    for &v in nodes {
        if !prefix.contains(&v) {
            prefix.push(v);
            sequences(nodes, prefix, end, out);
            prefix.pop();
        }
    }
}

fn exports(inst: &Instance, from: NodeId, to: NodeId, route: &Route) -> bool {
    let g = &inst.graph;
    if !g.adjacent(from, to) {
        return false;
    }
    if from == g.destination() {
        return true;
    }
    inst.profile.get(from).unwrap().export.permit(g, to, route)
}

fn admissible(inst: &Instance, route: &Route) -> bool {
    let g = &inst.graph;
    let hops = route.hops();
    let attackers: Vec<usize> = (0..hops.len())
        .filter(|&i| g.is_attacker(hops[i]))
        .collect();
    let honest_end = match attackers.as_slice() {
        [] => hops.len(),
        [a] if *a > 0 => {
            let claim = Route::new(hops[*a..].to_vec());
            let announced = inst.attacks.announcement(hops[*a], hops[a - 1]);
            if *announced != Announcement::Path(claim) || !g.adjacent(hops[*a], hops[a - 1]) {
                return false;
            }
            *a
        }
        _ => return false,
    };
    (1..honest_end).all(|t| exports(inst, hops[t], hops[t - 1], &Route::new(hops[t..].to_vec())))
}

/// Every simple node sequence from `owner` to the destination that
/// satisfies the perceivability conditions, checked directly, plus the empty
/// route.
pub fn brute_force_perceivable(inst: &Instance, owner: NodeId) -> BTreeSet<Route> {
    let mut all = Vec::new();
    sequences(
        inst.graph.nodes(),
        &mut vec![owner],
        inst.graph.destination(),
        &mut all,
    );
    let mut out: BTreeSet<Route> = all.into_iter().filter(|r| admissible(inst, r)).collect();
    out.insert(Route::empty());
    out
}
