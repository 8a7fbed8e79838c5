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

//! The bundled oscillation scenario.

use std::collections::BTreeMap;

use crate::attack::{parse_attacks, AttackSet};
use crate::engine::{parse_schedule, CyclicSchedule, InitialConfig, ParsedSchedule};
use crate::graph::{parse_topology, NodeId};
use crate::policy::{apply_overrides, make_shortest_path_profile, ExportChoice, Route};
use crate::Instance;

use super::{Expectation, Scenario, ScheduleSpec};

pub const GADGET_TOPOLOGY: &str = include_str!("../../scenarios/bad_gadget.topo");
pub const GADGET_RANKINGS: &str = include_str!("../../scenarios/bad_gadget.rank");
pub const GADGET_ATTACK: &str = include_str!("../../scenarios/bad_gadget.attack");
pub const GADGET_SCHEDULE: &str = include_str!("../../scenarios/bad_gadget.sched");

/// The gadget instance. Without the attack node 0 is an ordinary
/// shortest-path source.
pub fn bad_gadget_instance(attacked: bool) -> Instance {
    let mut graph = parse_topology(GADGET_TOPOLOGY).expect("bundled topology parses");
    if !attacked {
        graph.remove_attacker(NodeId(0));
    }
    let mut profile = make_shortest_path_profile(&graph, 0, ExportChoice::All);
    apply_overrides(&mut profile, &graph, GADGET_RANKINGS).expect("bundled rankings apply");
    let attacks = if attacked {
        parse_attacks(&graph, GADGET_ATTACK).expect("bundled attack parses")
    } else {
        AttackSet::silent(&graph)
    };
    Instance::new(graph, profile, attacks).expect("bundled instance is complete")
}

pub fn bad_gadget_schedule() -> CyclicSchedule {
    match parse_schedule(GADGET_SCHEDULE).expect("bundled schedule parses") {
        ParsedSchedule::Cyclic(c) => c,
        ParsedSchedule::Explicit(_) => unreachable!("bundled schedule is cyclic"),
    }
}

/// Under attack, from the all-empty start, with the round-robin schedule:
/// expected to oscillate.
pub fn bad_gadget_scenario() -> Scenario {
    Scenario {
        name: "bad_gadget".into(),
        instance: bad_gadget_instance(true),
        configs: vec![InitialConfig::empty()],
        schedule: ScheduleSpec::Cyclic(bad_gadget_schedule().steps),
        expectations: vec![Expectation::Oscillates],
    }
}

/// Without the attack: every fair run settles with 1, 2 and 3 on their
/// direct routes.
pub fn bad_gadget_pre_attack() -> Scenario {
    let direct: BTreeMap<NodeId, Route> = [1u32, 2, 3]
        .into_iter()
        .map(|i| (NodeId(i), Route::from_ids(&[i, 6])))
        .collect();
    Scenario {
        name: "bad_gadget_pre_attack".into(),
        instance: bad_gadget_instance(false),
        configs: vec![InitialConfig::empty()],
        schedule: ScheduleSpec::FairRandom,
        expectations: vec![Expectation::Converges, Expectation::Routes(direct)],
    }
}
