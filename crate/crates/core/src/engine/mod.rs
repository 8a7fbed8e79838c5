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

//! Asynchronous path-vector dynamics.
//!
//! One [`Simulation`] owns the mutable state of a run. Events are applied one
//! at a time by [`Simulation::step`]; the event order is the semantics.
//!
//! * Channels are per directed edge and hold at most `capacity` undelivered
//!   messages; the oldest is dropped on overflow.
//! * A delivered message waits in the receiver's inbox until the receiver is
//!   activated. Only the newest delivered message per neighbor takes effect,
//!   and only if it is newer than what the receiver already processed.
//! * Honest nodes send only when the value exported to a neighbor changed
//!   since the last send (their first activation always sends). The
//!   destination and attackers repeat their constant announcements on every
//!   activation, and have them in transit from the start.

mod oscillation;
mod rounds;
mod schedule;
mod trace;

pub use oscillation::{detect_oscillation, OscillationWitness};
pub use rounds::{round_of, RoundLedger};
pub use schedule::{
    parse_schedule, write_schedule, CyclicSchedule, ExplicitSchedule, FairRandomSchedule,
    MacroStep, ParsedSchedule, Pick, ScheduleEvent, ScheduleSource,
};
pub use trace::{run, EventRecord, Outcome, SelectionChange, StopCondition, Trace, TraceFormat};

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::Announcement;
use crate::graph::NodeId;
use crate::policy::{tie_break, NodePolicy, RankKey, Route};
use crate::seed::hash_words;
use crate::Instance;

/// Default per-channel bound on undelivered messages.
pub const DEFAULT_CAPACITY: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("no edge {0}->{1}")]
    NoEdge(NodeId, NodeId),
    #[error(
        "initial route {route} of node {node} is not a simple route from it to the destination"
    )]
    NotOwned { node: NodeId, route: Route },
    #[error("initial route {route} of node {node} does not leave through a neighbor")]
    NoSuchNextHop { node: NodeId, route: Route },
    #[error("initial entry from {sender} at {receiver} does not end at the destination: {route}")]
    BadRibEntry {
        receiver: NodeId,
        sender: NodeId,
        route: Route,
    },
    #[error("node {0} does not select routes")]
    NotHonest(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Destination,
    Attacker,
    Honest,
}

/// A message on a channel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UpdateMessage {
    pub sender: NodeId,
    pub receiver: NodeId,
    pub content: Route,
    pub send_index: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Entry {
    content: Route,
    index: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct NodeState {
    selected: Route,
    /// Adjacency position of the neighbor `selected` was learned from.
    via: Option<usize>,
    /// Aligned with the node's adjacency list.
    rib_in: Vec<Entry>,
    inbox: Vec<Option<Entry>>,
    last_sent: Vec<Option<Route>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
struct ChannelState {
    queue: VecDeque<Entry>,
    next_index: u64,
    dropped: u64,
}

#[derive(Debug, Clone, Copy)]
struct ChannelInfo {
    from: usize,
    to: usize,
    /// Position of `from` in `to`'s adjacency list.
    slot: usize,
}

/// Global configuration of a run.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimulationState {
    clock: u64,
    nodes: Vec<NodeState>,
    channels: Vec<ChannelState>,
}

/// Starting point of a run: arbitrary selections and believed announcements.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialConfig {
    pub selections: BTreeMap<NodeId, Route>,
    /// `(receiver, sender)` to the announcement the receiver believes it got.
    pub rib_in: BTreeMap<(NodeId, NodeId), Route>,
}

impl InitialConfig {
    /// Everything empty.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Arbitrary selections; every belief is what the sender would export
    /// given its selection (honest senders), the constant announcement
    /// (attackers) or `(d)` (destination).
    pub fn consistent(inst: &Instance, selections: BTreeMap<NodeId, Route>) -> Self {
        let g = &inst.graph;
        let mut rib_in = BTreeMap::new();
        for (i, &sender) in g.nodes().iter().enumerate() {
            for &(j, _) in g.adjacency(i) {
                let receiver = g.id_at(j);
                let content = if sender == g.destination() {
                    Route::new(vec![sender])
                } else if g.is_attacker(sender) {
                    match inst.attacks.announcement(sender, receiver) {
                        Announcement::Path(r) => r.clone(),
                        Announcement::Silence => Route::empty(),
                    }
                } else {
                    let sel = selections.get(&sender).cloned().unwrap_or_default();
                    let via = sel.next_hop().and_then(|n| g.idx(n));
                    match inst.profile.get(sender) {
                        Some(p) if p.export.permits(g, j, &sel, via) => sel,
                        _ => Route::empty(),
                    }
                };
                rib_in.insert((receiver, sender), content);
            }
        }
        InitialConfig { selections, rib_in }
    }
}

/// Outcome of one applied event.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepOutcome {
    pub changes: Vec<(NodeId, Route)>,
    pub sends: Vec<UpdateMessage>,
    /// Send index of the delivered message, if a delivery took place.
    pub delivered: Option<u64>,
    pub round_closed: bool,
}

pub struct Simulation<'a> {
    inst: &'a Instance,
    kinds: Vec<NodeKind>,
    policies: Vec<Option<&'a NodePolicy>>,
    chans: Vec<ChannelInfo>,
    /// Per node, aligned with adjacency: outgoing channel id.
    out_chan: Vec<Vec<usize>>,
    capacity: usize,
    state: SimulationState,
    ledger: RoundLedger,
    dest_route: Route,
}

impl std::fmt::Debug for Simulation<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulation")
            .field("state", &self.state)
            .field("ledger", &self.ledger)
            .finish()
    }
}

impl<'a> Simulation<'a> {
    pub fn initialize(inst: &'a Instance, config: &InitialConfig) -> Result<Self, EngineError> {
        Self::with_capacity(inst, config, DEFAULT_CAPACITY)
    }

    pub fn with_capacity(
        inst: &'a Instance,
        config: &InitialConfig,
        capacity: usize,
    ) -> Result<Self, EngineError> {
        let g = &inst.graph;
        let d = g.destination();
        let n = g.len();
        let kinds: Vec<NodeKind> = g
            .nodes()
            .iter()
            .map(|id| {
                if *id == d {
                    NodeKind::Destination
                } else if g.is_attacker(*id) {
                    NodeKind::Attacker
                } else {
                    NodeKind::Honest
                }
            })
            .collect();
        let policies = g
            .nodes()
            .iter()
            .map(|id| inst.profile.get(*id))
            .collect::<Vec<_>>();
        for (i, k) in kinds.iter().enumerate() {
            if *k == NodeKind::Honest && policies[i].is_none() {
                return Err(EngineError::NotHonest(g.id_at(i)));
            }
        }

        let mut chans = Vec::new();
        let mut out_chan = vec![Vec::new(); n];
        for (u, outs) in out_chan.iter_mut().enumerate() {
            for &(v, _) in g.adjacency(u) {
                let slot = g
                    .adjacency(v)
                    .iter()
                    .position(|(x, _)| *x == u)
                    .expect("symmetric adjacency");
                outs.push(chans.len());
                chans.push(ChannelInfo {
                    from: u,
                    to: v,
                    slot,
                });
            }
        }

        let mut nodes: Vec<NodeState> = (0..n)
            .map(|i| {
                let deg = g.adjacency(i).len();
                NodeState {
                    selected: Route::empty(),
                    via: None,
                    rib_in: vec![
                        Entry {
                            content: Route::empty(),
                            index: 0
                        };
                        deg
                    ],
                    inbox: vec![None; deg],
                    last_sent: vec![None; deg],
                }
            })
            .collect();

        for (node, route) in &config.selections {
            let i = g.idx(*node).ok_or(EngineError::UnknownNode(*node))?;
            if kinds[i] != NodeKind::Honest {
                return Err(EngineError::NotHonest(*node));
            }
            if route.is_empty() {
                continue;
            }
            if !route.is_valid_for(*node, d) {
                return Err(EngineError::NotOwned {
                    node: *node,
                    route: route.clone(),
                });
            }
            let via = route
                .next_hop()
                .and_then(|nh| g.idx(nh))
                .and_then(|nh| g.adjacency(i).iter().position(|(x, _)| *x == nh))
                .ok_or_else(|| EngineError::NoSuchNextHop {
                    node: *node,
                    route: route.clone(),
                })?;
            nodes[i].selected = route.clone();
            nodes[i].via = Some(via);
        }
        for ((receiver, sender), route) in &config.rib_in {
            let r = g
                .idx(*receiver)
                .ok_or(EngineError::UnknownNode(*receiver))?;
            let s = g.idx(*sender).ok_or(EngineError::UnknownNode(*sender))?;
            let slot = g
                .adjacency(r)
                .iter()
                .position(|(x, _)| *x == s)
                .ok_or(EngineError::NoEdge(*sender, *receiver))?;
            if !route.is_empty() && route.last() != Some(d) {
                return Err(EngineError::BadRibEntry {
                    receiver: *receiver,
                    sender: *sender,
                    route: route.clone(),
                });
            }
            nodes[r].rib_in[slot].content = route.clone();
        }

        let state = SimulationState {
            clock: 0,
            nodes,
            channels: vec![ChannelState::default(); chans.len()],
        };
        let receivers = chans.iter().map(|c| c.to).collect();
        let mut sim = Simulation {
            inst,
            kinds,
            policies,
            chans,
            out_chan,
            capacity: capacity.max(1),
            state,
            ledger: RoundLedger::new(n, receivers, &[]),
            dest_route: Route::new(vec![d]),
        };
        for u in 0..n {
            if sim.kinds[u] != NodeKind::Honest {
                sim.announce_constant(u, &mut Vec::new());
            }
        }
        let newest = sim.newest_indices();
        sim.ledger = RoundLedger::new(n, sim.chans.iter().map(|c| c.to).collect(), &newest);
        Ok(sim)
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn clock(&self) -> u64 {
        self.state.clock
    }

    pub fn state(&self) -> &SimulationState {
        &self.state
    }

    pub fn ledger(&self) -> &RoundLedger {
        &self.ledger
    }

    pub fn kind(&self, idx: usize) -> NodeKind {
        self.kinds[idx]
    }

    pub fn node_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn channel_count(&self) -> usize {
        self.chans.len()
    }

    pub fn channel_endpoints(&self, c: usize) -> (NodeId, NodeId) {
        let g = &self.inst.graph;
        (g.id_at(self.chans[c].from), g.id_at(self.chans[c].to))
    }

    pub fn channel_len(&self, c: usize) -> usize {
        self.state.channels[c].queue.len()
    }

    pub fn dropped(&self, c: usize) -> u64 {
        self.state.channels[c].dropped
    }

    pub fn in_flight(&self, from: NodeId, to: NodeId) -> Result<Vec<UpdateMessage>, EngineError> {
        let c = self.channel_id(from, to)?;
        Ok(self.state.channels[c]
            .queue
            .iter()
            .map(|e| UpdateMessage {
                sender: from,
                receiver: to,
                content: e.content.clone(),
                send_index: e.index,
            })
            .collect())
    }

    pub fn channel_id(&self, from: NodeId, to: NodeId) -> Result<usize, EngineError> {
        let g = &self.inst.graph;
        let u = g.idx(from).ok_or(EngineError::UnknownNode(from))?;
        let v = g.idx(to).ok_or(EngineError::UnknownNode(to))?;
        g.adjacency(u)
            .iter()
            .position(|(x, _)| *x == v)
            .map(|p| self.out_chan[u][p])
            .ok_or(EngineError::NoEdge(from, to))
    }

    /// Selected route of an honest node.
    pub fn selected(&self, node: NodeId) -> Option<&Route> {
        let i = self.inst.graph.idx(node)?;
        (self.kinds[i] == NodeKind::Honest).then(|| &self.state.nodes[i].selected)
    }

    /// Latest processed announcement at `receiver` from `sender`.
    pub fn rib_in(&self, receiver: NodeId, sender: NodeId) -> Option<&Route> {
        let c = self.channel_id(sender, receiver).ok()?;
        let ch = self.chans[c];
        Some(&self.state.nodes[ch.to].rib_in[ch.slot].content)
    }

    /// Selections of all honest nodes.
    pub fn assignment(&self) -> BTreeMap<NodeId, Route> {
        (0..self.kinds.len())
            .filter(|i| self.kinds[*i] == NodeKind::Honest)
            .map(|i| {
                (
                    self.inst.graph.id_at(i),
                    self.state.nodes[i].selected.clone(),
                )
            })
            .collect()
    }

    fn newest_indices(&self) -> Vec<Option<u64>> {
        self.state
            .channels
            .iter()
            .map(|c| c.queue.back().map(|e| e.index))
            .collect()
    }

    fn enqueue(&mut self, c: usize, content: Route, sends: &mut Vec<UpdateMessage>) {
        let cap = self.capacity;
        let ch = &mut self.state.channels[c];
        ch.next_index += 1;
        let index = ch.next_index;
        if ch.queue.len() == cap {
            ch.queue.pop_front();
            ch.dropped += 1;
            let newest = ch.queue.back().map(|e| e.index);
            self.ledger.lost(c, newest.max(Some(index)));
        }
        self.state.channels[c].queue.push_back(Entry {
            content: content.clone(),
            index,
        });
        let (from, to) = self.channel_endpoints(c);
        sends.push(UpdateMessage {
            sender: from,
            receiver: to,
            content,
            send_index: index,
        });
    }

    fn announce_constant(&mut self, u: usize, sends: &mut Vec<UpdateMessage>) {
        let g = &self.inst.graph;
        for p in 0..g.adjacency(u).len() {
            let c = self.out_chan[u][p];
            let content = match self.kinds[u] {
                NodeKind::Destination => self.dest_route.clone(),
                NodeKind::Attacker => {
                    let to = g.id_at(self.chans[c].to);
                    match self.inst.attacks.announcement(g.id_at(u), to) {
                        Announcement::Path(r) => r.clone(),
                        Announcement::Silence => continue,
                    }
                }
                NodeKind::Honest => unreachable!(),
            };
            self.enqueue(c, content, sends);
        }
    }

    /// Best route of honest node `v` over the given per-neighbor views.
    fn best_over<'r>(&self, v: usize, view: impl Fn(usize) -> &'r Route) -> (Route, Option<usize>) {
        let g = &self.inst.graph;
        let pol = self.policies[v].expect("honest node has a policy");
        let vid = g.id_at(v);
        let d = g.destination();
        let mut best_key: RankKey = pol.ranking.key(g, &Route::empty(), None);
        let mut best = (Route::empty(), None::<usize>);
        for (p, &(nb, _)) in g.adjacency(v).iter().enumerate() {
            let content = view(p);
            // a sender must name itself first
            if content.owner() != Some(g.id_at(nb))
                || content.last() != Some(d)
                || content.contains(vid)
            {
                continue;
            }
            if !content.is_simple() {
                continue;
            }
            let route = content.extended_by(vid);
            let key = pol.ranking.key(g, &route, Some(nb));
            let better = key > best_key
                || (key == best_key
                    && tie_break(
                        (&route, nb),
                        (&best.0, best.1.map_or(usize::MAX, |q| g.adjacency(v)[q].0)),
                    ) == std::cmp::Ordering::Greater);
            if better {
                best_key = key;
                best = (route, Some(p));
            }
        }
        best
    }

    /// What honest node `u` currently exports on its adjacency position `p`.
    fn export_value(&self, u: usize, p: usize) -> Route {
        let g = &self.inst.graph;
        let st = &self.state.nodes[u];
        let pol = self.policies[u].expect("honest node has a policy");
        let nb = g.adjacency(u)[p].0;
        let via = st.via.map(|q| g.adjacency(u)[q].0);
        if pol.export.permits(g, nb, &st.selected, via) {
            st.selected.clone()
        } else {
            Route::empty()
        }
    }

    /// Value a node constantly or currently announces on channel `c`;
    /// `None` for silence.
    fn channel_export(&self, c: usize) -> Option<Route> {
        let ch = self.chans[c];
        let g = &self.inst.graph;
        match self.kinds[ch.from] {
            NodeKind::Destination => Some(self.dest_route.clone()),
            NodeKind::Attacker => match self
                .inst
                .attacks
                .announcement(g.id_at(ch.from), g.id_at(ch.to))
            {
                Announcement::Path(r) => Some(r.clone()),
                Announcement::Silence => None,
            },
            NodeKind::Honest => {
                let p = self.out_chan[ch.from]
                    .iter()
                    .position(|x| *x == c)
                    .expect("own channel");
                Some(self.export_value(ch.from, p))
            }
        }
    }

    fn activate_honest(&mut self, v: usize, out: &mut StepOutcome) {
        let st = &mut self.state.nodes[v];
        for p in 0..st.rib_in.len() {
            if let Some(e) = st.inbox[p].take() {
                if e.index > st.rib_in[p].index {
                    st.rib_in[p] = e;
                }
            }
        }
        let (route, via) = {
            let st = &self.state.nodes[v];
            self.best_over(v, |p| &st.rib_in[p].content)
        };
        let st = &mut self.state.nodes[v];
        if route != st.selected {
            out.changes.push((self.inst.graph.id_at(v), route.clone()));
        }
        st.selected = route;
        st.via = via;
        for p in 0..self.state.nodes[v].rib_in.len() {
            let value = self.export_value(v, p);
            if self.state.nodes[v].last_sent[p].as_ref() != Some(&value) {
                self.state.nodes[v].last_sent[p] = Some(value.clone());
                let c = self.out_chan[v][p];
                self.enqueue(c, value, &mut out.sends);
            }
        }
    }

    fn pick_position(&self, c: usize, pick: Pick) -> Option<usize> {
        let q = &self.state.channels[c].queue;
        if q.is_empty() {
            return None;
        }
        match pick {
            Pick::Oldest => Some(0),
            Pick::Newest => Some(q.len() - 1),
            Pick::Nth(k) => (k < q.len()).then_some(k),
            Pick::Index(i) => q.iter().position(|e| e.index == i),
        }
    }

    /// Applies one event. Malformed events are rejected without any change.
    pub fn step(&mut self, event: &ScheduleEvent) -> Result<StepOutcome, EngineError> {
        let mut out = StepOutcome::default();
        match event {
            ScheduleEvent::Activate(set) => {
                let g = &self.inst.graph;
                let mut idxs = set
                    .iter()
                    .map(|n| g.idx(*n).ok_or(EngineError::UnknownNode(*n)))
                    .collect::<Result<Vec<_>, _>>()?;
                idxs.sort_unstable();
                idxs.dedup();
                self.state.clock += 1;
                for &v in &idxs {
                    match self.kinds[v] {
                        NodeKind::Honest => self.activate_honest(v, &mut out),
                        _ => {
                            let mut sends = std::mem::take(&mut out.sends);
                            self.announce_constant(v, &mut sends);
                            out.sends = sends;
                        }
                    }
                    self.ledger.activated(v);
                }
            }
            ScheduleEvent::Deliver { from, to, pick } => {
                let c = self.channel_id(*from, *to)?;
                self.state.clock += 1;
                if let Some(pos) = self.pick_position(c, *pick) {
                    let e = self.state.channels[c]
                        .queue
                        .remove(pos)
                        .expect("picked position");
                    let ch = self.chans[c];
                    let index = e.index;
                    let slot = &mut self.state.nodes[ch.to].inbox[ch.slot];
                    if slot.as_ref().is_none_or(|old| old.index < e.index) {
                        *slot = Some(e);
                    }
                    self.ledger.delivered(c, index);
                    out.delivered = Some(index);
                }
            }
            ScheduleEvent::Drop { from, to, pick } => {
                let c = self.channel_id(*from, *to)?;
                self.state.clock += 1;
                if let Some(pos) = self.pick_position(c, *pick) {
                    let ch = &mut self.state.channels[c];
                    ch.queue.remove(pos);
                    ch.dropped += 1;
                    let newest = ch.queue.back().map(|e| e.index);
                    self.ledger.lost(c, newest);
                }
            }
        }
        let newest = self.newest_indices();
        out.round_closed = self.ledger.settle(self.state.clock, &newest);
        Ok(out)
    }

    /// True when no continuation can change any selection: every message
    /// still to be processed carries exactly what its sender exports now,
    /// every belief already equals that export (or can never be replaced),
    /// and every selection is the best route over those beliefs.
    pub fn is_quiescent(&self) -> bool {
        for (c, ch) in self.chans.iter().enumerate() {
            if self.kinds[ch.to] != NodeKind::Honest {
                continue;
            }
            let Some(x) = self.channel_export(c) else {
                // silence: the belief is frozen
                continue;
            };
            let node = &self.state.nodes[ch.to];
            let rib = &node.rib_in[ch.slot];
            let newer = node.inbox[ch.slot]
                .iter()
                .chain(self.state.channels[c].queue.iter())
                .filter(|e| e.index > rib.index);
            let mut pending = false;
            for e in newer {
                if e.content != x {
                    return false;
                }
                pending = true;
            }
            if rib.content == x {
                continue;
            }
            // a stale belief is only harmless if nothing will ever replace it
            let resends = match self.kinds[ch.from] {
                NodeKind::Honest => {
                    let p = self.out_chan[ch.from]
                        .iter()
                        .position(|y| *y == c)
                        .expect("own channel");
                    self.state.nodes[ch.from].last_sent[p].as_ref() != Some(&x)
                }
                _ => true,
            };
            if pending || resends {
                return false;
            }
        }
        (0..self.kinds.len())
            .filter(|v| self.kinds[*v] == NodeKind::Honest)
            .all(|v| {
                let st = &self.state.nodes[v];
                self.best_over(v, |p| &st.rib_in[p].content).0 == st.selected
            })
    }

    /// Digest of the full state, send indices and clock included.
    pub fn state_digest(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.state.hash(&mut h);
        h.finish()
    }

    /// 128-bit digest of the state up to renaming of send indices: only their
    /// relative order per channel matters. The clock is excluded.
    pub fn canonical_digest(&self) -> (u64, u64) {
        let mut words: Vec<u64> = Vec::new();
        let push_route = |words: &mut Vec<u64>, r: &Route| {
            words.push(r.hops().len() as u64);
            words.extend(r.hops().iter().map(|n| n.0 as u64));
        };
        for st in &self.state.nodes {
            push_route(&mut words, &st.selected);
            words.push(st.via.map_or(u64::MAX, |v| v as u64));
            for p in 0..st.rib_in.len() {
                match &st.last_sent[p] {
                    None => words.push(u64::MAX),
                    Some(r) => push_route(&mut words, r),
                }
            }
        }
        for (c, ch) in self.chans.iter().enumerate() {
            let node = &self.state.nodes[ch.to];
            let rib = &node.rib_in[ch.slot];
            let inbox = node.inbox[ch.slot].as_ref();
            let queue = &self.state.channels[c].queue;
            let mut idx: Vec<u64> = std::iter::once(rib.index)
                .chain(inbox.map(|e| e.index))
                .chain(queue.iter().map(|e| e.index))
                .collect();
            idx.sort_unstable();
            idx.dedup();
            let rank = |i: u64| idx.binary_search(&i).unwrap() as u64;
            words.push(0xc0ffee);
            words.push(rank(rib.index));
            push_route(&mut words, &rib.content);
            match inbox {
                None => words.push(u64::MAX),
                Some(e) => {
                    words.push(rank(e.index));
                    push_route(&mut words, &e.content);
                }
            }
            words.push(queue.len() as u64);
            for e in queue {
                words.push(rank(e.index));
                push_route(&mut words, &e.content);
            }
        }
        (
            hash_words(1, words.iter().copied()),
            hash_words(2, words.iter().copied()),
        )
    }
}

#[cfg(test)]
mod tests;
