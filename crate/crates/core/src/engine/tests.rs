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

use std::collections::BTreeMap;

use super::*;
use crate::attack::AttackSet;
use crate::graph::AsGraph;
use crate::harness::{bad_gadget_instance, bad_gadget_schedule};
use crate::policy::{make_shortest_path_profile, ExportChoice};

fn n(i: u32) -> NodeId {
    NodeId(i)
}

fn r(ids: &[u32]) -> Route {
    Route::from_ids(ids)
}

/// d=0 - 1 - 2
fn chain() -> Instance {
    let mut g = AsGraph::new(n(0));
    for i in 1..=2 {
        g.add_node(n(i)).unwrap();
    }
    g.add_plain(n(0), n(1)).unwrap();
    g.add_plain(n(1), n(2)).unwrap();
    let profile = make_shortest_path_profile(&g, 7, ExportChoice::All);
    let attacks = AttackSet::silent(&g);
    Instance::new(g, profile, attacks).unwrap()
}

fn act(ids: &[u32]) -> ScheduleEvent {
    ScheduleEvent::Activate(ids.iter().map(|i| n(*i)).collect())
}

fn dlv(a: u32, b: u32) -> ScheduleEvent {
    ScheduleEvent::Deliver {
        from: n(a),
        to: n(b),
        pick: Pick::Oldest,
    }
}

#[test]
fn empty_start_announces_destination() {
    let inst = chain();
    let sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
    assert_eq!(sim.selected(n(1)), Some(&Route::empty()));
    assert_eq!(sim.selected(n(2)), Some(&Route::empty()));
    assert_eq!(sim.rib_in(n(2), n(1)), Some(&Route::empty()));
    let inflight = sim.in_flight(n(0), n(1)).unwrap();
    assert_eq!(inflight.len(), 1);
    assert_eq!(inflight[0].content, r(&[0]));
    assert!(sim.in_flight(n(1), n(2)).unwrap().is_empty());
    assert!(!sim.is_quiescent());
}

#[test]
fn destination_activation_reannounces() {
    let inst = chain();
    let mut sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
    let out = sim.step(&act(&[0])).unwrap();
    assert_eq!(out.sends.len(), 1);
    assert_eq!(out.sends[0].content, r(&[0]));
    assert_eq!(out.sends[0].send_index, 2);
    assert!(out.changes.is_empty());
}

#[test]
fn poisoned_start_is_accepted() {
    let inst = bad_gadget_instance(false);
    let mut cfg = InitialConfig::empty();
    cfg.selections.insert(n(3), r(&[3, 0, 6]));
    let sim = Simulation::initialize(&inst, &cfg).unwrap();
    assert_eq!(sim.selected(n(3)), Some(&r(&[3, 0, 6])));
}

#[test]
fn bad_initial_routes_are_rejected() {
    let inst = chain();
    let mut cfg = InitialConfig::empty();
    cfg.selections.insert(n(2), r(&[1, 0]));
    assert!(matches!(
        Simulation::initialize(&inst, &cfg),
        Err(EngineError::NotOwned { .. })
    ));
    let mut cfg = InitialConfig::empty();
    cfg.selections.insert(n(2), r(&[2, 0]));
    assert!(matches!(
        Simulation::initialize(&inst, &cfg),
        Err(EngineError::NoSuchNextHop { .. })
    ));
    let mut cfg = InitialConfig::empty();
    cfg.rib_in.insert((n(2), n(0)), r(&[0]));
    assert!(matches!(
        Simulation::initialize(&inst, &cfg),
        Err(EngineError::NoEdge(..))
    ));
}

#[test]
fn looping_belief_is_never_selected() {
    let inst = chain();
    let mut cfg = InitialConfig::empty();
    cfg.rib_in.insert((n(1), n(2)), r(&[2, 1, 0]));
    let mut sim = Simulation::initialize(&inst, &cfg).unwrap();
    sim.step(&act(&[1])).unwrap();
    assert_eq!(sim.selected(n(1)), Some(&Route::empty()));
}

#[test]
fn cycle_node_prefers_route_through_neighbor() {
    let inst = bad_gadget_instance(true);
    let mut cfg = InitialConfig::empty();
    cfg.rib_in.insert((n(1), n(0)), r(&[0, 6]));
    cfg.rib_in.insert((n(1), n(3)), r(&[3, 0, 6]));
    cfg.rib_in.insert((n(1), n(6)), r(&[6]));
    let mut sim = Simulation::initialize(&inst, &cfg).unwrap();
    let out = sim.step(&act(&[1])).unwrap();
    assert_eq!(sim.selected(n(1)), Some(&r(&[1, 3, 0, 6])));
    assert_eq!(out.changes, vec![(n(1), r(&[1, 3, 0, 6]))]);
    // export-all: the new route goes to every neighbor
    assert_eq!(out.sends.len(), 4);
}

#[test]
fn repeated_activation_is_idempotent() {
    let inst = chain();
    let mut sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
    sim.step(&dlv(0, 1)).unwrap();
    let first = sim.step(&act(&[1])).unwrap();
    assert_eq!(first.changes.len(), 1);
    let before = sim.canonical_digest();
    let second = sim.step(&act(&[1])).unwrap();
    assert!(second.changes.is_empty());
    assert!(second.sends.is_empty());
    assert_eq!(sim.canonical_digest(), before);
}

#[test]
fn malformed_events_leave_state_alone() {
    let inst = chain();
    let mut sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
    let before = sim.state().clone();
    assert!(matches!(
        sim.step(&act(&[9])),
        Err(EngineError::UnknownNode(_))
    ));
    assert!(matches!(sim.step(&dlv(0, 2)), Err(EngineError::NoEdge(..))));
    assert_eq!(sim.state(), &before);
}

#[test]
fn deliver_on_empty_channel_is_a_noop() {
    let inst = chain();
    let mut sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
    let before = sim.canonical_digest();
    let out = sim.step(&dlv(1, 2)).unwrap();
    assert_eq!(out.delivered, None);
    assert_eq!(sim.canonical_digest(), before);
    assert_eq!(sim.clock(), 1);
}

#[test]
fn older_message_after_newer_is_ignored() {
    let inst = chain();
    let mut sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
    // 1 learns (1,0) and tells 2; then 1 loses it again and tells 2
    sim.step(&dlv(0, 1)).unwrap();
    sim.step(&act(&[1])).unwrap();
    assert_eq!(sim.in_flight(n(1), n(2)).unwrap()[0].content, r(&[1, 0]));
    let newest = ScheduleEvent::Deliver {
        from: n(1),
        to: n(2),
        pick: Pick::Newest,
    };
    sim.step(&newest).unwrap();
    sim.step(&act(&[2])).unwrap();
    assert_eq!(sim.selected(n(2)), Some(&r(&[2, 1, 0])));
    // replay of an older index cannot exist any more; the only one was consumed
    assert!(sim.in_flight(n(1), n(2)).unwrap().is_empty());
}

#[test]
fn reordered_delivery_keeps_newest() {
    // node 1 flips its selection twice, 2 receives the two updates out of order
    let mut g = AsGraph::new(n(0));
    for i in 1..=3 {
        g.add_node(n(i)).unwrap();
    }
    g.add_plain(n(0), n(1)).unwrap();
    g.add_plain(n(1), n(2)).unwrap();
    g.add_plain(n(0), n(3)).unwrap();
    g.add_plain(n(3), n(1)).unwrap();
    let profile = make_shortest_path_profile(&g, 1, ExportChoice::All);
    let inst = Instance::new(g.clone(), profile, AttackSet::silent(&g)).unwrap();
    let mut cfg = InitialConfig::empty();
    cfg.rib_in.insert((n(1), n(3)), r(&[3, 0]));
    let mut sim = Simulation::initialize(&inst, &cfg).unwrap();
    sim.step(&act(&[1])).unwrap(); // selects (1,3,0), index 1 to node 2
    sim.step(&dlv(0, 1)).unwrap();
    sim.step(&act(&[1])).unwrap(); // selects (1,0), index 2 to node 2
    let q = sim.in_flight(n(1), n(2)).unwrap();
    assert_eq!(
        q.iter().map(|m| m.send_index).collect::<Vec<_>>(),
        vec![1, 2]
    );
    sim.step(&ScheduleEvent::Deliver {
        from: n(1),
        to: n(2),
        pick: Pick::Index(2),
    })
    .unwrap();
    sim.step(&ScheduleEvent::Deliver {
        from: n(1),
        to: n(2),
        pick: Pick::Index(1),
    })
    .unwrap();
    sim.step(&act(&[2])).unwrap();
    assert_eq!(sim.selected(n(2)), Some(&r(&[2, 1, 0])));
}

#[test]
fn overflow_drops_oldest() {
    let inst = chain();
    let mut sim = Simulation::with_capacity(&inst, &InitialConfig::empty(), 2).unwrap();
    for _ in 0..3 {
        sim.step(&act(&[0])).unwrap();
    }
    let c = sim.channel_id(n(0), n(1)).unwrap();
    let idx: Vec<u64> = sim
        .in_flight(n(0), n(1))
        .unwrap()
        .iter()
        .map(|m| m.send_index)
        .collect();
    assert_eq!(idx, vec![3, 4]);
    assert_eq!(sim.dropped(c), 2);
}

#[test]
fn isolated_source_is_quiescent() {
    let mut g = AsGraph::new(n(0));
    g.add_node(n(1)).unwrap();
    let profile = make_shortest_path_profile(&g, 0, ExportChoice::All);
    let inst = Instance::new(g.clone(), profile, AttackSet::silent(&g)).unwrap();
    let sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
    assert!(sim.is_quiescent());
}

#[test]
fn direct_routes_before_attack_are_quiescent() {
    let inst = bad_gadget_instance(false);
    // node 0 has three equally short ways out; only its seeded favorite is stable
    let quiet: Vec<u32> = (1..=3)
        .filter(|&via| {
            let mut sel = BTreeMap::new();
            for i in 1..=3 {
                sel.insert(n(i), r(&[i, 6]));
            }
            sel.insert(n(5), r(&[5, 6]));
            sel.insert(n(4), r(&[4, 5, 6]));
            sel.insert(n(0), r(&[0, via, 6]));
            let cfg = InitialConfig::consistent(&inst, sel);
            Simulation::initialize(&inst, &cfg).unwrap().is_quiescent()
        })
        .collect();
    assert_eq!(quiet.len(), 1);
}

#[test]
fn oscillating_states_are_never_quiescent() {
    let inst = bad_gadget_instance(true);
    let mut sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
    let mut sched = bad_gadget_schedule();
    let mut changes = 0;
    for _ in 0..400 {
        let ev = sched.next_event(&sim).unwrap();
        changes += sim.step(&ev).unwrap().changes.len();
        if sim.clock() > 60 {
            assert!(!sim.is_quiescent(), "quiescent at {}", sim.clock());
        }
    }
    assert!(changes > 10);
}

#[test]
fn gadget_cycle_is_detected() {
    let inst = bad_gadget_instance(true);
    let w = detect_oscillation(
        &inst,
        &InitialConfig::empty(),
        &mut bad_gadget_schedule(),
        10_000,
    )
    .unwrap()
    .expect("oscillation");
    assert_eq!(w.nodes, [n(1), n(2), n(3)].into_iter().collect());
    assert!(w.period() > 0);
    for i in 1..=3 {
        assert!(w.routes_of(n(i)).len() >= 2);
    }
}

#[test]
fn no_cycle_without_attack() {
    let inst = bad_gadget_instance(false);
    let w = detect_oscillation(
        &inst,
        &InitialConfig::empty(),
        &mut bad_gadget_schedule(),
        10_000,
    )
    .unwrap();
    assert!(w.is_none());
    let inst = chain();
    let mut sched = CyclicSchedule::new(vec![
        MacroStep::Activate(vec![n(0), n(1), n(2)]),
        MacroStep::DeliverAll,
    ]);
    assert!(
        detect_oscillation(&inst, &InitialConfig::empty(), &mut sched, 1000)
            .unwrap()
            .is_none()
    );
}

#[test]
fn synchronous_schedule_has_one_round_per_cycle() {
    let inst = chain();
    let mut sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
    let mut sched = CyclicSchedule::new(vec![
        MacroStep::DeliverAll,
        MacroStep::Activate(vec![n(0), n(1), n(2)]),
    ]);
    let mut cycles = 0;
    for _ in 0..200 {
        let ev = sched.next_event(&sim).unwrap();
        let is_act = matches!(ev, ScheduleEvent::Activate(_));
        let out = sim.step(&ev).unwrap();
        if is_act {
            cycles += 1;
            assert!(out.round_closed, "cycle {cycles} did not close a round");
        } else {
            assert!(!out.round_closed);
        }
    }
    assert_eq!(sim.ledger().completed(), cycles);
}

#[test]
fn trace_counts_completed_rounds_only() {
    let inst = chain();
    let mut sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
    let events = vec![dlv(0, 1), act(&[0, 1, 2]), dlv(0, 1), dlv(1, 2)];
    let trace = run(
        &mut sim,
        &mut ExplicitSchedule::new(events),
        StopCondition::events(100).recording(),
    )
    .unwrap();
    assert_eq!(trace.outcome, Outcome::ScheduleEnded);
    assert_eq!(trace.round_count(), 1);
    assert_eq!(trace.round_ends, vec![2]);
    assert_eq!(trace.events[3].round, 2);
}

#[test]
fn chain_converges_under_fair_schedule() {
    let inst = chain();
    for seed in 0..20 {
        let mut sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
        let mut src = FairRandomSchedule::new(seed, &sim);
        let trace = run(&mut sim, &mut src, StopCondition::default()).unwrap();
        assert!(trace.outcome.is_converged());
        assert_eq!(trace.final_assignment[&n(2)], r(&[2, 1, 0]));
        assert!(trace.convergence_round() <= 3);
    }
}

#[test]
fn same_seed_same_trace() {
    let inst = bad_gadget_instance(false);
    let go = |seed| {
        let mut sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
        let mut src = FairRandomSchedule::new(seed, &sim);
        run(&mut sim, &mut src, StopCondition::default().recording()).unwrap()
    };
    let (a, b) = (go(3), go(3));
    assert_eq!(a.render(TraceFormat::Text), b.render(TraceFormat::Text));
    assert_eq!(a.hash_hex(), b.hash_hex());
    assert_ne!(a.hash_hex(), go(4).hash_hex());
}

#[test]
fn fair_schedule_respects_window() {
    let inst = bad_gadget_instance(false);
    let mut sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
    let mut src = FairRandomSchedule::new(11, &sim);
    let w = src.window();
    let mut last_act = vec![0u64; sim.node_count()];
    for _ in 0..2000 {
        let ev = src.next_event(&sim).unwrap();
        if let ScheduleEvent::Activate(set) = &ev {
            for v in set {
                last_act[inst.graph.idx(*v).unwrap()] = sim.clock() + 1;
            }
        }
        sim.step(&ev).unwrap();
        for (v, t) in last_act.iter().enumerate() {
            assert!(sim.clock() - t <= w, "node {v} starved at {}", sim.clock());
        }
    }
}

#[test]
fn text_trace_lines() {
    let inst = chain();
    let mut sim = Simulation::initialize(&inst, &InitialConfig::empty()).unwrap();
    let events = vec![dlv(0, 1), act(&[1])];
    let trace = run(
        &mut sim,
        &mut ExplicitSchedule::new(events),
        StopCondition::events(10).recording(),
    )
    .unwrap();
    let text = trace.render(TraceFormat::Text);
    assert!(
        text.contains("t=1 ev=dlv node=1 from=0 idx=1 round=1"),
        "{text}"
    );
    assert!(text.contains("t=2 ev=act node=1 sel=1,0 round=1"), "{text}");
    let json = trace.render(TraceFormat::Ndjson);
    let last: serde_json::Value = serde_json::from_str(json.lines().last().unwrap()).unwrap();
    assert_eq!(last["summary"]["assignment"]["1"], "1,0");
}
