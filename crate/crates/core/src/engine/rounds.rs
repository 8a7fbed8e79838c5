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

//! Asynchronous-round accounting.
//!
//! A round ends at the earliest event after which every node has (a) received,
//! from each neighbor that had messages in transit when the round began, the
//! newest of those messages or a later one, and (b) been activated after its
//! last such receipt. The next round starts right after.

/// Per-round bookkeeping, updated after every event.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RoundLedger {
    completed: u32,
    boundaries: Vec<u64>,
    /// Per channel: newest index in transit at round start, while unsatisfied.
    targets: Vec<Option<u64>>,
    /// Per node: number of unsatisfied channel targets towards it.
    outstanding: Vec<u32>,
    /// Per node: activated after its last required receipt.
    done: Vec<bool>,
    receivers: Vec<usize>,
}

impl RoundLedger {
    /// `receivers[c]` is the receiving node of channel `c`; `newest[c]` the
    /// newest in-transit index at time zero.
    pub(crate) fn new(node_count: usize, receivers: Vec<usize>, newest: &[Option<u64>]) -> Self {
        let mut ledger = RoundLedger {
            completed: 0,
            boundaries: Vec::new(),
            targets: vec![None; receivers.len()],
            outstanding: vec![0; node_count],
            done: vec![false; node_count],
            receivers,
        };
        ledger.begin(newest);
        ledger
    }

    fn begin(&mut self, newest: &[Option<u64>]) {
        self.outstanding.iter_mut().for_each(|o| *o = 0);
        self.done.iter_mut().for_each(|d| *d = false);
        for (c, t) in newest.iter().enumerate() {
            self.targets[c] = *t;
            if t.is_some() {
                self.outstanding[self.receivers[c]] += 1;
            }
        }
    }

    fn satisfy(&mut self, channel: usize) {
        if self.targets[channel].take().is_some() {
            let v = self.receivers[channel];
            self.outstanding[v] -= 1;
        }
    }

    pub(crate) fn delivered(&mut self, channel: usize, index: u64) {
        if matches!(self.targets[channel], Some(t) if index >= t) {
            self.satisfy(channel);
        }
    }

    /// A message left `channel` without delivery; `newest` is the newest
    /// index still queued there.
    pub(crate) fn lost(&mut self, channel: usize, newest: Option<u64>) {
        if let Some(t) = self.targets[channel] {
            if newest.is_none_or(|n| n < t) {
                self.satisfy(channel);
            }
        }
    }

    pub(crate) fn activated(&mut self, node: usize) {
        if self.outstanding[node] == 0 {
            self.done[node] = true;
        }
    }

    /// Closes the round if complete. Returns true when a round ended at `clock`.
    pub(crate) fn settle(&mut self, clock: u64, newest: &[Option<u64>]) -> bool {
        if self.done.iter().all(|d| *d) {
            self.completed += 1;
            self.boundaries.push(clock);
            self.begin(newest);
            true
        } else {
            false
        }
    }

    pub fn completed(&self) -> u32 {
        self.completed
    }

    /// Clock of the event that closed each completed round.
    pub fn boundaries(&self) -> &[u64] {
        &self.boundaries
    }

    /// 1-based round containing the event at `clock`.
    pub fn round_of(&self, clock: u64) -> u32 {
        round_of(&self.boundaries, clock)
    }
}

/// 1-based round containing the event at `clock`, given round-closing clocks.
pub fn round_of(boundaries: &[u64], clock: u64) -> u32 {
    boundaries.partition_point(|b| *b < clock) as u32 + 1
}
