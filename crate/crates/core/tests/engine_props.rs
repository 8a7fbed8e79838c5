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

//! Step-level properties of the simulator on random instances.

use proptest::prelude::*;

use stablepath::attack::Announcement;
use stablepath::engine::{FairRandomSchedule, InitialConfig, ScheduleSource, Simulation};
use stablepath::harness::{
    commercial_with_depth, predict, random_initial_config, random_shortest_path_instance,
};
use stablepath::oracle::perceivable_routes;
use stablepath::Instance;

/// Steps a fair random schedule to quiescence, checking every state on the
/// way. Returns the number of events used.
fn drive(
    inst: &Instance,
    config: &InitialConfig,
    sched_seed: u64,
    from_empty: bool,
) -> Result<u64, TestCaseError> {
    let g = &inst.graph;
    let d = g.destination();
    let mut sim = Simulation::initialize(inst, config).unwrap();
    let mut source = FairRandomSchedule::new(sched_seed, &sim);
    let perceivable: Vec<_> = g
        .honest_sources()
        .map(|v| (v, perceivable_routes(inst, v).unwrap().routes))
        .collect();
    let mut events = 0u64;
    while !sim.is_quiescent() {
        prop_assert!(events < 200_000, "no quiescence");
        let ev = source.next_event(&sim).expect("fair schedules never end");
        sim.step(&ev).unwrap();
        events += 1;

        for &a in g.attackers() {
            for (nb, _) in g.neighbors(a).unwrap() {
                let queued = sim.in_flight(a, nb).unwrap();
                match inst.attacks.announcement(a, nb) {
                    Announcement::Path(p) => prop_assert!(queued.iter().all(|m| &m.content == p)),
                    Announcement::Silence => prop_assert!(queued.is_empty()),
                }
            }
        }
        for (v, prs) in &perceivable {
            let sel = sim.selected(*v).unwrap();
            prop_assert!(sel.is_empty() || sel.is_valid_for(*v, d), "{v} holds {sel}");
            if from_empty {
                prop_assert!(prs.contains(sel), "{v} holds unperceivable {sel}");
            }
        }
    }
    let expected = predict(inst, 0).unwrap().assignment.routes();
    prop_assert_eq!(sim.assignment(), expected);
    Ok(events)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shortest_path_runs(nodes in 3usize..9, attackers in 0usize..4, seed in any::<u64>(), sched in any::<u64>(), random_start in any::<bool>()) {
        let inst = random_shortest_path_instance(nodes, attackers.min(nodes - 2), 0.3, seed).unwrap();
        let config = if random_start { random_initial_config(&inst, seed) } else { InitialConfig::empty() };
        drive(&inst, &config, sched, !random_start)?;
    }

    #[test]
    fn commercial_runs(depth in 0usize..4, attackers in 0usize..3, seed in any::<u64>(), sched in any::<u64>(), random_start in any::<bool>()) {
        let inst = commercial_with_depth(depth, attackers, seed).unwrap();
        let config = if random_start { random_initial_config(&inst, seed) } else { InitialConfig::empty() };
        drive(&inst, &config, sched, !random_start)?;
    }

    #[test]
    fn same_seed_same_run(nodes in 3usize..8, seed in any::<u64>(), sched in any::<u64>()) {
        let inst = random_shortest_path_instance(nodes, 1, 0.3, seed).unwrap();
        let config = random_initial_config(&inst, seed);
        let digests = |s: u64| {
            let mut sim = Simulation::initialize(&inst, &config).unwrap();
            let mut source = FairRandomSchedule::new(s, &sim);
            (0..300).map(|_| {
                let ev = source.next_event(&sim).unwrap();
                sim.step(&ev).unwrap();
                sim.state_digest()
            }).collect::<Vec<_>>()
        };
        prop_assert_eq!(digests(sched), digests(sched));
    }
}
