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

//! Route selection under fixed-route attackers.
//!
//! The crate models a path-vector routing system towards a single destination
//! where some nodes are attackers that announce fixed, arbitrary routes.
//!
//! * [`graph`]: AS graphs, relationships, topology files.
//! * [`policy`]: routes, rankings and export filters.
//! * [`attack`]: fixed-route attack configurations.
//! * [`engine`]: the asynchronous simulator, schedules and round accounting.
//! * [`oracle`]: perceivable routes and the constructive stable assignments.
//! * [`harness`]: instance generators, sweeps and the oscillation scenario.

pub mod attack;
pub mod engine;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod policy;
pub mod seed;

use thiserror::Error;

use attack::AttackSet;
use graph::{AsGraph, NodeId};
use policy::{PolicyError, PolicyProfile};

/// A complete problem instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: AsGraph,
    pub profile: PolicyProfile,
    pub attacks: AttackSet,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("attack configured for non-attacker {0}")]
    StrayAttack(NodeId),
}

impl Instance {
    /// Bundles the parts, checking that every honest source has a policy and
    /// every attack belongs to an attacker.
    pub fn new(
        graph: AsGraph,
        profile: PolicyProfile,
        attacks: AttackSet,
    ) -> Result<Self, InstanceError> {
        profile.covers(&graph)?;
        if let Some(a) = attacks.iter().find(|a| !graph.is_attacker(a.attacker)) {
            return Err(InstanceError::StrayAttack(a.attacker));
        }
        Ok(Instance {
            graph,
            profile,
            attacks,
        })
    }
}
