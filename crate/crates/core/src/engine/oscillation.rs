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

//! Oscillation witnesses.
//!
//! Under a periodic schedule the run is a deterministic function of the
//! (canonical state, schedule position) pair. Seeing a pair twice means the
//! segment in between repeats forever; if some selection changed in that
//! segment, the run never converges.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{
    run, EngineError, InitialConfig, Outcome, ScheduleSource, SelectionChange, Simulation,
    StopCondition,
};
use crate::graph::NodeId;
use crate::policy::Route;
use crate::Instance;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OscillationWitness {
    /// Clock at which the repeated configuration was first seen.
    pub first_clock: u64,
    /// Clock at which it was seen again.
    pub repeat_clock: u64,
    /// Selection changes inside one period, as `(clock, node, route)`.
    pub changes: Vec<(u64, NodeId, Route)>,
    pub nodes: BTreeSet<NodeId>,
}

impl OscillationWitness {
    pub(crate) fn from_cycle(
        first_clock: u64,
        repeat_clock: u64,
        cycle: &[SelectionChange],
    ) -> Self {
        OscillationWitness {
            first_clock,
            repeat_clock,
            changes: cycle
                .iter()
                .map(|c| (c.clock, c.node, c.route.clone()))
                .collect(),
            nodes: cycle.iter().map(|c| c.node).collect(),
        }
    }

    pub fn period(&self) -> u64 {
        self.repeat_clock - self.first_clock
    }

    /// Distinct routes `node` cycles through.
    pub fn routes_of(&self, node: NodeId) -> BTreeSet<&Route> {
        self.changes
            .iter()
            .filter(|(_, n, _)| *n == node)
            .map(|(_, _, r)| r)
            .collect()
    }
}

/// Runs a periodic schedule from `config` for at most `max_events` events.
/// Returns the witness if the run is found to cycle with selection changes,
/// `None` if it converged or the budget ran out.
pub fn detect_oscillation(
    inst: &Instance,
    config: &InitialConfig,
    source: &mut dyn ScheduleSource,
    max_events: u64,
) -> Result<Option<OscillationWitness>, EngineError> {
    let mut sim = Simulation::initialize(inst, config)?;
    let stop = StopCondition {
        detect_cycles: true,
        ..StopCondition::events(max_events)
    };
    let trace = run(&mut sim, source, stop)?;
    Ok(match trace.outcome {
        Outcome::Oscillating { witness } => Some(witness),
        _ => None,
    })
}
