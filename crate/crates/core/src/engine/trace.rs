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

//! Driving a simulation to an outcome and recording what happened.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{
    round_of, EngineError, NodeKind, OscillationWitness, ScheduleEvent, ScheduleSource, Simulation,
    UpdateMessage,
};
use crate::graph::NodeId;
use crate::policy::Route;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopCondition {
    pub max_events: u64,
    /// Give up once this many rounds completed without quiescence.
    pub max_rounds: Option<u32>,
    pub stop_on_quiescence: bool,
    /// Look for repeated (state, schedule position) pairs. Only effective
    /// with sources that report a fingerprint.
    pub detect_cycles: bool,
    /// Keep every event and send in the trace.
    pub record: bool,
}

impl StopCondition {
    pub fn events(max_events: u64) -> Self {
        StopCondition {
            max_events,
            max_rounds: None,
            stop_on_quiescence: true,
            detect_cycles: true,
            record: false,
        }
    }

    pub fn with_rounds(mut self, rounds: u32) -> Self {
        self.max_rounds = Some(rounds);
        self
    }

    pub fn recording(mut self) -> Self {
        self.record = true;
        self
    }
}

impl Default for StopCondition {
    fn default() -> Self {
        Self::events(1_000_000)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// No fair continuation can change a selection any more.
    Converged { clock: u64 },
    /// The run entered a cycle in which selections keep changing.
    Oscillating { witness: OscillationWitness },
    /// Event or round budget used up first.
    Exhausted,
    /// A finite schedule ran out of events before quiescence.
    ScheduleEnded,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Converged { .. } => "converged",
            Outcome::Oscillating { .. } => "oscillating",
            Outcome::Exhausted => "exhausted",
            Outcome::ScheduleEnded => "schedule_ended",
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Outcome::Converged { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelectionChange {
    pub clock: u64,
    pub node: NodeId,
    pub route: Route,
    pub round: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventRecord {
    pub clock: u64,
    pub event: ScheduleEvent,
    pub round: u32,
    /// For activations: the selection of each activated honest node after
    /// the event.
    pub selections: Vec<(NodeId, Route)>,
    pub delivered: Option<u64>,
    pub sends: Vec<UpdateMessage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub events: Vec<EventRecord>,
    pub changes: Vec<SelectionChange>,
    pub round_ends: Vec<u64>,
    pub event_count: u64,
    pub outcome: Outcome,
    pub final_assignment: BTreeMap<NodeId, Route>,
    /// Per honest node: the round of its last selection change, 0 if none.
    pub stabilization: BTreeMap<NodeId, u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Text,
    Ndjson,
}

impl Trace {
    /// Rounds completed before the run stopped.
    pub fn round_count(&self) -> u32 {
        self.round_ends.len() as u32
    }

    /// Round in which the last selection change happened, 0 if none did.
    pub fn convergence_round(&self) -> u32 {
        self.stabilization.values().copied().max().unwrap_or(0)
    }

    pub fn render(&self, format: TraceFormat) -> String {
        match format {
            TraceFormat::Text => self.render_text(),
            TraceFormat::Ndjson => self.render_ndjson(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            match &e.event {
                ScheduleEvent::Activate(set) => {
                    for n in set {
                        let sel = e
                            .selections
                            .iter()
                            .find(|(m, _)| m == n)
                            .map_or_else(|| "-".to_string(), |(_, r)| r.to_string());
                        out += &format!(
                            "t={} ev=act node={} sel={} round={}\n",
                            e.clock, n, sel, e.round
                        );
                    }
                }
                ScheduleEvent::Deliver { from, to, .. } | ScheduleEvent::Drop { from, to, .. } => {
                    let idx = e
                        .delivered
                        .map_or_else(|| "-".to_string(), |i| i.to_string());
                    out += &format!(
                        "t={} ev={} node={} from={} idx={} round={}\n",
                        e.clock,
                        e.event.kind(),
                        to,
                        from,
                        idx,
                        e.round
                    );
                }
            }
        }
        out += &self.summary_line();
        out.push('\n');
        out
    }

    fn render_ndjson(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out += &serde_json::to_string(e).expect("serializable event");
            out.push('\n');
        }
        let summary = serde_json::json!({
            "summary": {
                "outcome": self.outcome.label(),
                "events": self.event_count,
                "rounds": self.round_count(),
                "convergence_round": self.convergence_round(),
                "changes": self.changes.len(),
                "assignment": self.final_assignment.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect::<BTreeMap<_, _>>(),
                "hash": self.hash_hex(),
            }
        });
        out += &summary.to_string();
        out.push('\n');
        out
    }

    pub fn summary_line(&self) -> String {
        let assignment: Vec<String> = self
            .final_assignment
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect();
        format!(
            "outcome={} events={} rounds={} convergence_round={} changes={} assignment={} hash={}",
            self.outcome.label(),
            self.event_count,
            self.round_count(),
            self.convergence_round(),
            self.changes.len(),
            assignment.join(";"),
            self.hash_hex()
        )
    }

    /// SHA-256 over the recorded events, the selection history and the
    /// final assignment.
    pub fn hash_hex(&self) -> String {
        let mut h = Sha256::new();
        for e in &self.events {
            h.update(format!("{} {}", e.clock, e.event));
            for m in &e.sends {
                h.update(format!(
                    " {}>{}:{}@{}",
                    m.sender, m.receiver, m.content, m.send_index
                ));
            }
            h.update("\n");
        }
        for c in &self.changes {
            h.update(format!("{} {} {}\n", c.clock, c.node, c.route));
        }
        for (k, v) in &self.final_assignment {
            h.update(format!("{k}={v}\n"));
        }
        h.update(self.outcome.label());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Runs `source` against `sim` until `stop` says otherwise.
pub fn run(
    sim: &mut Simulation<'_>,
    source: &mut dyn ScheduleSource,
    stop: StopCondition,
) -> Result<Trace, EngineError> {
    let g = &sim.instance().graph;
    let mut events = Vec::new();
    let mut changes: Vec<SelectionChange> = Vec::new();
    let mut seen: HashMap<(u64, u64, u64), (u64, usize)> = HashMap::new();
    let mut count = 0u64;

    let outcome = loop {
        if stop.stop_on_quiescence && sim.is_quiescent() {
            break Outcome::Converged { clock: sim.clock() };
        }
        if stop.detect_cycles {
            if let Some(fp) = source.fingerprint() {
                let (a, b) = sim.canonical_digest();
                match seen.get(&(a, b, fp)) {
                    Some(&(clock, first_change)) => {
                        if first_change < changes.len() {
                            let cycle = &changes[first_change..];
                            break Outcome::Oscillating {
                                witness: OscillationWitness::from_cycle(clock, sim.clock(), cycle),
                            };
                        }
                        // the future repeats with no selection changes
                        break Outcome::Converged { clock: sim.clock() };
                    }
                    None => {
                        seen.insert((a, b, fp), (sim.clock(), changes.len()));
                    }
                }
            }
        }
        if count >= stop.max_events
            || stop
                .max_rounds
                .is_some_and(|r| sim.ledger().completed() >= r)
        {
            break Outcome::Exhausted;
        }
        let Some(event) = source.next_event(sim) else {
            break Outcome::ScheduleEnded;
        };
        let out = sim.step(&event)?;
        count += 1;
        let clock = sim.clock();
        for (node, route) in &out.changes {
            changes.push(SelectionChange {
                clock,
                node: *node,
                route: route.clone(),
                round: 0,
            });
        }
        if stop.record {
            let selections = match &event {
                ScheduleEvent::Activate(set) => set
                    .iter()
                    .filter(|n| g.idx(**n).is_some_and(|i| sim.kind(i) == NodeKind::Honest))
                    .map(|n| (*n, sim.selected(*n).cloned().unwrap_or_default()))
                    .collect(),
                _ => Vec::new(),
            };
            events.push(EventRecord {
                clock,
                event,
                round: 0,
                selections,
                delivered: out.delivered,
                sends: out.sends,
            });
        }
    };

    let round_ends = sim.ledger().boundaries().to_vec();
    for c in &mut changes {
        c.round = round_of(&round_ends, c.clock);
    }
    for e in &mut events {
        e.round = round_of(&round_ends, e.clock);
    }
    let final_assignment = sim.assignment();
    let mut stabilization: BTreeMap<NodeId, u32> =
        final_assignment.keys().map(|k| (*k, 0)).collect();
    for c in &changes {
        stabilization.insert(c.node, c.round);
    }
    Ok(Trace {
        events,
        changes,
        round_ends,
        event_count: count,
        outcome,
        final_assignment,
        stabilization,
    })
}
