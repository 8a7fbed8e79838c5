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

//! Event sources: explicit lists, cyclic macro schedules and a seeded fair
//! random scheduler.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{NodeKind, Simulation};
use crate::graph::{content_lines, parse_id, syntax, NodeId, ParseError};

/// Which in-flight message of a channel an event refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pick {
    Oldest,
    Newest,
    /// By send index.
    Index(u64),
    /// By queue position, 0 = oldest.
    Nth(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScheduleEvent {
    Activate(Vec<NodeId>),
    Deliver {
        from: NodeId,
        to: NodeId,
        pick: Pick,
    },
    Drop {
        from: NodeId,
        to: NodeId,
        pick: Pick,
    },
}

impl ScheduleEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            ScheduleEvent::Activate(_) => "act",
            ScheduleEvent::Deliver { .. } => "dlv",
            ScheduleEvent::Drop { .. } => "drop",
        }
    }
}

impl std::fmt::Display for Pick {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pick::Oldest => write!(f, "oldest"),
            Pick::Newest => write!(f, "newest"),
            Pick::Index(i) => write!(f, "{i}"),
            Pick::Nth(k) => write!(f, "@{k}"),
        }
    }
}

impl std::fmt::Display for ScheduleEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScheduleEvent::Activate(set) => {
                let ids: Vec<String> = set.iter().map(|n| n.to_string()).collect();
                write!(f, "act {}", ids.join(","))
            }
            ScheduleEvent::Deliver { from, to, pick } => write!(f, "dlv {from}->{to} {pick}"),
            ScheduleEvent::Drop { from, to, pick } => write!(f, "drop {from}->{to} {pick}"),
        }
    }
}

/// Produces the next event given the current simulation, or `None` when the
/// schedule is exhausted.
pub trait ScheduleSource {
    fn next_event(&mut self, sim: &Simulation<'_>) -> Option<ScheduleEvent>;

    /// Identifies the internal position for periodic sources, so that equal
    /// (state, fingerprint) pairs imply identical futures. `None` for sources
    /// whose future is not a function of such a fingerprint.
    fn fingerprint(&self) -> Option<u64> {
        None
    }
}

/// A finite list of events.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitSchedule {
    pub events: Vec<ScheduleEvent>,
    #[serde(skip)]
    pos: usize,
}

impl ExplicitSchedule {
    pub fn new(events: Vec<ScheduleEvent>) -> Self {
        ExplicitSchedule { events, pos: 0 }
    }
}

impl ScheduleSource for ExplicitSchedule {
    fn next_event(&mut self, _sim: &Simulation<'_>) -> Option<ScheduleEvent> {
        let e = self.events.get(self.pos).cloned();
        self.pos += 1;
        e
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MacroStep {
    Activate(Vec<NodeId>),
    /// Deliver every in-flight message, oldest first, channel by channel.
    DeliverAll,
}

/// Repeats a list of macro steps forever.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicSchedule {
    pub steps: Vec<MacroStep>,
    #[serde(skip)]
    pos: usize,
}

impl CyclicSchedule {
    pub fn new(steps: Vec<MacroStep>) -> Self {
        assert!(!steps.is_empty(), "empty cycle");
        CyclicSchedule { steps, pos: 0 }
    }
}

impl ScheduleSource for CyclicSchedule {
    fn next_event(&mut self, sim: &Simulation<'_>) -> Option<ScheduleEvent> {
        loop {
            match &self.steps[self.pos] {
                MacroStep::Activate(set) => {
                    self.pos = (self.pos + 1) % self.steps.len();
                    return Some(ScheduleEvent::Activate(set.clone()));
                }
                MacroStep::DeliverAll => {
                    if let Some(c) = (0..sim.channel_count()).find(|c| sim.channel_len(*c) > 0) {
                        let (from, to) = sim.channel_endpoints(c);
                        return Some(ScheduleEvent::Deliver {
                            from,
                            to,
                            pick: Pick::Oldest,
                        });
                    }
                    self.pos = (self.pos + 1) % self.steps.len();
                }
            }
        }
    }

    fn fingerprint(&self) -> Option<u64> {
        Some(self.pos as u64)
    }
}

/// Seeded random schedule with bounded waiting.
///
/// Every node is activated and every non-empty channel has its newest
/// message delivered at least once per `window` events. Only superseded
/// (non-newest) messages are ever dropped, and only when `drop_permille` > 0.
#[derive(Debug, Clone)]
pub struct FairRandomSchedule {
    rng: ChaCha8Rng,
    window: u64,
    drop_permille: u32,
    node_wait: Vec<u64>,
    chan_wait: Vec<u64>,
}

impl FairRandomSchedule {
    pub fn new(seed: u64, sim: &Simulation<'_>) -> Self {
        let window = 4 * sim.node_count() as u64;
        FairRandomSchedule {
            rng: ChaCha8Rng::seed_from_u64(seed),
            window: window.max(4),
            drop_permille: 50,
            node_wait: vec![0; sim.node_count()],
            chan_wait: vec![0; sim.channel_count()],
        }
    }

    pub fn with_drops(mut self, permille: u32) -> Self {
        self.drop_permille = permille.min(1000);
        self
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    fn tick(&mut self) {
        self.node_wait.iter_mut().for_each(|w| *w += 1);
        self.chan_wait.iter_mut().for_each(|w| *w += 1);
    }

    fn activate(&mut self, sim: &Simulation<'_>, nodes: Vec<usize>) -> ScheduleEvent {
        let g = &sim.instance().graph;
        for &v in &nodes {
            self.node_wait[v] = 0;
        }
        ScheduleEvent::Activate(nodes.into_iter().map(|v| g.id_at(v)).collect())
    }

    fn deliver(&mut self, sim: &Simulation<'_>, c: usize, pick: Pick) -> ScheduleEvent {
        if matches!(pick, Pick::Newest) {
            self.chan_wait[c] = 0;
        }
        let (from, to) = sim.channel_endpoints(c);
        ScheduleEvent::Deliver { from, to, pick }
    }
}

impl ScheduleSource for FairRandomSchedule {
    fn next_event(&mut self, sim: &Simulation<'_>) -> Option<ScheduleEvent> {
        self.tick();
        // empty channels never wait
        for c in 0..sim.channel_count() {
            if sim.channel_len(c) == 0 {
                self.chan_wait[c] = 0;
            }
        }
        let limit = self.window / 2;
        if let Some(c) = (0..self.chan_wait.len()).max_by_key(|c| self.chan_wait[*c]) {
            if self.chan_wait[c] >= limit {
                return Some(self.deliver(sim, c, Pick::Newest));
            }
        }
        if let Some(v) = (0..self.node_wait.len()).max_by_key(|v| self.node_wait[*v]) {
            if self.node_wait[v] >= limit {
                let overdue: Vec<usize> = (0..self.node_wait.len())
                    .filter(|v| self.node_wait[*v] >= limit)
                    .collect();
                return Some(self.activate(sim, overdue));
            }
        }

        let busy: Vec<usize> = (0..sim.channel_count())
            .filter(|c| sim.channel_len(*c) > 0)
            .collect();
        let roll = self.rng.gen_range(0..1000u32);
        if !busy.is_empty() && roll < 600 {
            let c = busy[self.rng.gen_range(0..busy.len())];
            let len = sim.channel_len(c);
            let pick = match self.rng.gen_range(0..4u32) {
                0 => Pick::Newest,
                1 if len > 1 => Pick::Nth(self.rng.gen_range(0..len)),
                _ => Pick::Oldest,
            };
            if len > 1 && self.rng.gen_range(0..1000u32) < self.drop_permille {
                let (from, to) = sim.channel_endpoints(c);
                return Some(ScheduleEvent::Drop {
                    from,
                    to,
                    pick: Pick::Nth(self.rng.gen_range(0..len - 1)),
                });
            }
            let pick = if pick == Pick::Nth(len - 1) {
                Pick::Newest
            } else {
                pick
            };
            return Some(self.deliver(sim, c, pick));
        }
        let n = sim.node_count();
        let mut set = vec![self.rng.gen_range(0..n)];
        while set.len() < n && self.rng.gen_bool(0.3) {
            let v = self.rng.gen_range(0..n);
            if !set.contains(&v) {
                set.push(v);
            }
        }
        // honest nodes are the interesting ones; others still get their turn
        if sim.kind(set[0]) != NodeKind::Honest && self.rng.gen_bool(0.5) {
            set.retain(|v| sim.kind(*v) == NodeKind::Honest);
            if set.is_empty() {
                set.push(self.rng.gen_range(0..n));
            }
        }
        set.sort_unstable();
        Some(self.activate(sim, set))
    }
}

/// A parsed schedule file: either a finite event list or, when the first
/// line is `cycle`, a repeating macro schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedSchedule {
    Explicit(ExplicitSchedule),
    Cyclic(CyclicSchedule),
}

fn parse_set(line: usize, tok: &str) -> Result<Vec<NodeId>, ParseError> {
    tok.split(',').map(|t| parse_id(line, t)).collect()
}

fn parse_channel(line: usize, tok: &str) -> Result<(NodeId, NodeId), ParseError> {
    let (a, b) = tok
        .split_once("->")
        .ok_or_else(|| syntax(line, format!("expected u->v, got `{tok}`")))?;
    Ok((parse_id(line, a)?, parse_id(line, b)?))
}

fn parse_pick(line: usize, tok: Option<&&str>) -> Result<Pick, ParseError> {
    let Some(tok) = tok else {
        return Ok(Pick::Oldest);
    };
    match *tok {
        "oldest" => Ok(Pick::Oldest),
        "newest" => Ok(Pick::Newest),
        t if t.starts_with('@') => t[1..]
            .parse()
            .map(Pick::Nth)
            .map_err(|_| syntax(line, "bad position")),
        t => t
            .parse()
            .map(Pick::Index)
            .map_err(|_| syntax(line, "bad send index")),
    }
}

/// Parses `act 1,2`, `dlv u->v [oldest|newest|<send index>|@pos]`, `drop u->v ...`
/// lines, or a `cycle` header followed by `act` and `deliver-all` lines.
pub fn parse_schedule(text: &str) -> Result<ParsedSchedule, ParseError> {
    let mut lines = content_lines(text).peekable();
    if matches!(lines.peek(), Some((_, t)) if t.as_slice() == ["cycle"]) {
        lines.next();
        let mut steps = Vec::new();
        for (line, toks) in lines {
            match toks.as_slice() {
                ["act", set] => steps.push(MacroStep::Activate(parse_set(line, set)?)),
                ["deliver-all"] => steps.push(MacroStep::DeliverAll),
                _ => return Err(syntax(line, "expected `act <ids>` or `deliver-all`")),
            }
        }
        if steps.is_empty() {
            return Err(syntax(1, "empty cycle"));
        }
        return Ok(ParsedSchedule::Cyclic(CyclicSchedule::new(steps)));
    }
    let mut events = Vec::new();
    for (line, toks) in lines {
        let ev = match toks.as_slice() {
            ["act", set] => ScheduleEvent::Activate(parse_set(line, set)?),
            ["dlv", ch, rest @ ..] if rest.len() <= 1 => {
                let (from, to) = parse_channel(line, ch)?;
                ScheduleEvent::Deliver {
                    from,
                    to,
                    pick: parse_pick(line, rest.first())?,
                }
            }
            ["drop", ch, rest @ ..] if rest.len() <= 1 => {
                let (from, to) = parse_channel(line, ch)?;
                ScheduleEvent::Drop {
                    from,
                    to,
                    pick: parse_pick(line, rest.first())?,
                }
            }
            _ => return Err(syntax(line, "expected `act`, `dlv` or `drop`")),
        };
        events.push(ev);
    }
    Ok(ParsedSchedule::Explicit(ExplicitSchedule::new(events)))
}

/// Renders events one per line in the format read by [`parse_schedule`].
pub fn write_schedule(events: &[ScheduleEvent]) -> String {
    events.iter().map(|e| format!("{e}\n")).collect()
}
